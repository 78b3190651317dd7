/**
 * Reconstruction of pickled numpy arrays and scalars.
 *
 * A pickled ndarray arrives as `_reconstruct(ndarray, (0,), b'b')` followed
 * by a BUILD whose state is `(version, shape, dtype, is_fortran, data)`.
 * Objects are filled in place because the memo may already point at them.
 */

import { PickleError, PyGlobal, PyShell, PyTuple } from './pyvalues.js'

type ElementReader = (view: DataView, byteOffset: number, littleEndian: boolean) => number

interface DtypeInfo {
  itemsize: number
  read: ElementReader
}

function readI64(view: DataView, off: number, le: boolean): number {
  const v = view.getBigInt64(off, le)
  if (v < BigInt(Number.MIN_SAFE_INTEGER) || v > BigInt(Number.MAX_SAFE_INTEGER))
    throw new PickleError(`int64 value ${v} does not fit a double`)
  return Number(v)
}

function readU64(view: DataView, off: number, le: boolean): number {
  const v = view.getBigUint64(off, le)
  if (v > BigInt(Number.MAX_SAFE_INTEGER))
    throw new PickleError(`uint64 value ${v} does not fit a double`)
  return Number(v)
}

const DTYPES: Record<string, DtypeInfo> = {
  f8: { itemsize: 8, read: (v, o, le) => v.getFloat64(o, le) },
  f4: { itemsize: 4, read: (v, o, le) => v.getFloat32(o, le) },
  i1: { itemsize: 1, read: (v, o) => v.getInt8(o) },
  i2: { itemsize: 2, read: (v, o, le) => v.getInt16(o, le) },
  i4: { itemsize: 4, read: (v, o, le) => v.getInt32(o, le) },
  i8: { itemsize: 8, read: readI64 },
  u1: { itemsize: 1, read: (v, o) => v.getUint8(o) },
  u2: { itemsize: 2, read: (v, o, le) => v.getUint16(o, le) },
  u4: { itemsize: 4, read: (v, o, le) => v.getUint32(o, le) },
  u8: { itemsize: 8, read: readU64 },
  b1: { itemsize: 1, read: (v, o) => (v.getUint8(o) ? 1 : 0) },
}

/** numpy.dtype instance; REDUCE brings the descriptor, BUILD the byte order. */
export class NpDtype {
  readonly descr: string
  byteorder = '='

  constructor(args: unknown[]) {
    const d = args[0]
    if (typeof d !== 'string') throw new PickleError('dtype: expected a descriptor string')
    this.descr = d
  }

  /** state: (version, byteorder, subdescr, names, fields, elsize, alignment, flags) */
  applyState(state: unknown[]): void {
    if (state.length < 2 || typeof state[1] !== 'string')
      throw new PickleError('dtype state: expected a byte-order string')
    this.byteorder = state[1]
  }

  get info(): DtypeInfo {
    const key = this.descr === 'bool' ? 'b1' : this.descr
    const info = DTYPES[key]
    if (!info) throw new PickleError(`unsupported dtype '${this.descr}'`)
    return info
  }

  get littleEndian(): boolean {
    if (this.byteorder === '>') return false
    return true // '<', '=', '|'; native is little-endian everywhere we run
  }

  toString(): string {
    return `${this.byteorder}${this.descr}`
  }
}

/** Dense numeric array; values are flattened in C (row-major) order. */
export class NDArray {
  dtype = ''
  shape: number[] = []
  values: number[] = []
  filled = false

  get ndim(): number {
    return this.shape.length
  }

  /** Nested-array view, e.g. number[][] for a matrix. */
  nested(): unknown {
    const build = (dim: number, offset: number): unknown => {
      if (dim === this.shape.length) return this.values[offset]
      const n = this.shape[dim]
      const stride = this.shape.slice(dim + 1).reduce((a, b) => a * b, 1)
      const out = new Array(n)
      for (let i = 0; i < n; i++) out[i] = build(dim + 1, offset + i * stride)
      return out
    }
    if (this.shape.length === 0) return this.values[0]
    return build(0, 0)
  }
}

/** `_reconstruct(subtype, shape_stub, dtype_stub)`: allocate an empty array. */
export function makeArrayShell(args: unknown[]): NDArray | PyShell {
  const cls = args[0]
  if (cls instanceof PyGlobal && cls.qualname === 'numpy.ndarray') return new NDArray()
  const name = cls instanceof PyGlobal ? cls.qualname : String(cls)
  return new PyShell(`${name} (via _reconstruct)`, args.slice(1))
}

function expectDtype(x: unknown, via: string): NpDtype {
  if (!(x instanceof NpDtype)) throw new PickleError(`${via}: expected a dtype instance`)
  return x
}

function fillArray(
  arr: NDArray,
  shapeRaw: unknown,
  dtypeRaw: unknown,
  fortran: boolean,
  data: unknown,
  via: string,
): void {
  if (!(shapeRaw instanceof PyTuple)) throw new PickleError(`${via}: shape must be a tuple`)
  const shape = shapeRaw.map((s) => {
    if (typeof s !== 'number' || !Number.isInteger(s) || s < 0)
      throw new PickleError(`${via}: bad shape entry`)
    return s
  })
  const dtype = expectDtype(dtypeRaw, via)
  if (fortran && shape.length > 1)
    throw new PickleError('Fortran-order arrays are not supported')
  if (!(data instanceof Uint8Array)) {
    if (Array.isArray(data)) throw new PickleError("object arrays are not supported (dtype 'O')")
    throw new PickleError(`${via}: expected raw data bytes`)
  }

  const { itemsize, read } = dtype.info
  const count = shape.reduce((a, b) => a * b, 1)
  if (data.length !== count * itemsize)
    throw new PickleError(
      `ndarray data is ${data.length} bytes, expected ${count * itemsize} for shape [${shape}] ${dtype}`,
    )
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength)
  const le = dtype.littleEndian
  const values = new Array<number>(count)
  for (let i = 0; i < count; i++) values[i] = read(view, i * itemsize, le)

  arr.dtype = dtype.descr
  arr.shape = shape
  arr.values = values
  arr.filled = true
}

/** ndarray BUILD state: (version, shape, dtype, is_fortran, data). */
export function applyArrayState(arr: NDArray, state: unknown): void {
  if (!(state instanceof PyTuple) || state.length < 5)
    throw new PickleError('ndarray state: expected a 5-tuple')
  const [, shapeRaw, dtypeRaw, fortran, data] = state
  fillArray(arr, shapeRaw, dtypeRaw, fortran === true, data, 'ndarray state')
}

/** `numpy._core.numeric._frombuffer(data, dtype, shape, order)`: how
 * protocol-5 pickles spell a contiguous array. */
export function makeFrombufferArray(args: unknown[]): NDArray {
  if (args.length < 4) throw new PickleError('_frombuffer: expected (data, dtype, shape, order)')
  const [data, dtypeRaw, shapeRaw, order] = args
  if (order !== 'C' && order !== 'F')
    throw new PickleError(`_frombuffer: unknown memory order '${String(order)}'`)
  const arr = new NDArray()
  fillArray(arr, shapeRaw, dtypeRaw, order === 'F', data, '_frombuffer')
  return arr
}

/** `numpy.(_)core.multiarray.scalar(dtype, data)` -> plain number. */
export function decodeScalar(args: unknown[]): number {
  const dtype = expectDtype(args[0], 'numpy scalar')
  const data = args[1]
  if (!(data instanceof Uint8Array) || data.length !== dtype.info.itemsize)
    throw new PickleError('numpy scalar: bad data bytes')
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength)
  return dtype.info.read(view, 0, dtype.littleEndian)
}
