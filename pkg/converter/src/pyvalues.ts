/**
 * Value model for unpickled Python objects.
 *
 * None -> null, bool -> boolean, int -> number (bigint outside the safe
 * range), float -> number, str -> string, bytes/bytearray -> Uint8Array,
 * list -> Array, tuple -> PyTuple, dict -> Map, set/frozenset -> Set.
 * Instances of classes we have no constructor for become PyShell records.
 */

export class PickleError extends Error {}

/** Python tuple; distinguished from list for schema inspection. */
export class PyTuple extends Array<unknown> {}

/** Marker for an imported module attribute (class or function). */
export class PyGlobal {
  constructor(
    readonly module: string,
    readonly name: string,
  ) {}

  get qualname(): string {
    return `${this.module}.${this.name}`
  }
}

/** Instance of a class the reader has no constructor for. */
export class PyShell {
  state: unknown = undefined
  readonly dictItems = new Map<unknown, unknown>()
  readonly listItems: unknown[] = []

  constructor(
    readonly cls: string,
    readonly args: unknown[],
  ) {}
}
