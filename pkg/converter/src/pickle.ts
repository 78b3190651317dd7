/**
 * Pickle stream reader covering protocols 0 through 5.
 *
 * Python values map to: None -> null, bool -> boolean, int -> number
 * (bigint when outside the safe integer range), float -> number,
 * str -> string, bytes/bytearray -> Uint8Array, list -> Array,
 * tuple -> PyTuple, dict -> Map, set/frozenset -> Set. Class instances
 * whose constructors we do not know become PyShell records carrying the
 * class name, constructor args, and state, so callers can inspect what
 * a file contains and report it instead of guessing.
 */

import {
  NDArray,
  NpDtype,
  applyArrayState,
  decodeScalar,
  makeArrayShell,
  makeFrombufferArray,
} from './numpy.js'
import { PickleError, PyGlobal, PyShell, PyTuple } from './pyvalues.js'

export { PickleError, PyGlobal, PyShell, PyTuple } from './pyvalues.js'

const MARK = Symbol('mark')

type Reducer = (args: unknown[]) => unknown

function latin1Encode(s: string): Uint8Array {
  const out = new Uint8Array(s.length)
  for (let i = 0; i < s.length; i++) {
    const c = s.charCodeAt(i)
    if (c > 0xff) throw new PickleError(`latin-1 encode: code point ${c} out of range`)
    out[i] = c
  }
  return out
}

function asTuple(x: unknown, what: string): unknown[] {
  if (!(x instanceof PyTuple)) throw new PickleError(`${what}: expected a tuple`)
  return x
}

/** Constructors for the module globals motion files actually reference. */
const REDUCERS: Record<string, Reducer> = {
  'numpy._core.multiarray._reconstruct': (args) => makeArrayShell(args),
  'numpy.core.multiarray._reconstruct': (args) => makeArrayShell(args),
  'numpy._core.multiarray.scalar': (args) => decodeScalar(args),
  'numpy.core.multiarray.scalar': (args) => decodeScalar(args),
  'numpy._core.numeric._frombuffer': (args) => makeFrombufferArray(args),
  'numpy.core.numeric._frombuffer': (args) => makeFrombufferArray(args),
  'numpy.dtype': (args) => new NpDtype(args),
  '_codecs.encode': (args) => {
    const [s, enc] = args
    if (typeof s !== 'string') throw new PickleError('_codecs.encode: expected a string')
    if (enc !== undefined && enc !== 'latin1' && enc !== 'latin-1')
      throw new PickleError(`_codecs.encode: unsupported encoding ${String(enc)}`)
    return latin1Encode(s)
  },
  'builtins.bytearray': (args) => {
    if (args.length === 0) return new Uint8Array(0)
    if (args[0] instanceof Uint8Array) return Uint8Array.from(args[0])
    throw new PickleError('bytearray: unsupported constructor args')
  },
  'builtins.list': (args) => (args.length ? Array.from(args[0] as Iterable<unknown>) : []),
  'builtins.tuple': (args) => PyTuple.from(args.length ? (args[0] as Iterable<unknown>) : []),
  'builtins.set': (args) => new Set(args.length ? (args[0] as Iterable<unknown>) : []),
  'builtins.dict': (args) => (args.length ? new Map(args[0] as Iterable<[unknown, unknown]>) : new Map()),
  'builtins.complex': () => {
    throw new PickleError('complex numbers are not supported')
  },
  'collections.OrderedDict': (args) => {
    const m = new Map<unknown, unknown>()
    if (args.length && Array.isArray(args[0]))
      for (const pair of args[0] as unknown[][]) m.set(pair[0], pair[1])
    return m
  },
}

function unescapePyString(s: string): string {
  let out = ''
  for (let i = 0; i < s.length; i++) {
    const c = s[i]
    if (c !== '\\') {
      out += c
      continue
    }
    const n = s[++i]
    if (n === 'n') out += '\n'
    else if (n === 't') out += '\t'
    else if (n === 'r') out += '\r'
    else if (n === '\\') out += '\\'
    else if (n === "'") out += "'"
    else if (n === '"') out += '"'
    else if (n === '0') out += '\0'
    else if (n === 'x') {
      out += String.fromCharCode(parseInt(s.slice(i + 1, i + 3), 16))
      i += 2
    } else throw new PickleError(`unsupported string escape \\${n}`)
  }
  return out
}

function parsePyInt(text: string): number | bigint | boolean {
  if (text === '01') return true
  if (text === '00') return false
  const big = BigInt(text)
  return fitInt(big)
}

function fitInt(big: bigint): number | bigint {
  if (big >= BigInt(Number.MIN_SAFE_INTEGER) && big <= BigInt(Number.MAX_SAFE_INTEGER))
    return Number(big)
  return big
}

/** Decode a little-endian two's-complement integer of arbitrary width. */
function decodeLong(bytes: Uint8Array): number | bigint {
  if (bytes.length === 0) return 0
  let v = 0n
  for (let i = bytes.length - 1; i >= 0; i--) v = (v << 8n) | BigInt(bytes[i])
  const bits = BigInt(bytes.length * 8)
  if (bytes[bytes.length - 1] & 0x80) v -= 1n << bits
  return fitInt(v)
}

class Reader {
  pos = 0

  constructor(readonly buf: Buffer) {}

  need(n: number): void {
    if (this.pos + n > this.buf.length)
      throw new PickleError(`truncated pickle: wanted ${n} bytes at offset ${this.pos}, have ${this.buf.length - this.pos}`)
  }

  u1(): number {
    this.need(1)
    return this.buf[this.pos++]
  }

  u2(): number {
    this.need(2)
    const v = this.buf.readUInt16LE(this.pos)
    this.pos += 2
    return v
  }

  u4(): number {
    this.need(4)
    const v = this.buf.readUInt32LE(this.pos)
    this.pos += 4
    return v
  }

  i4(): number {
    this.need(4)
    const v = this.buf.readInt32LE(this.pos)
    this.pos += 4
    return v
  }

  u8(): number {
    this.need(8)
    const v = this.buf.readBigUInt64LE(this.pos)
    this.pos += 8
    if (v > BigInt(Number.MAX_SAFE_INTEGER)) throw new PickleError('length exceeds supported size')
    return Number(v)
  }

  f8be(): number {
    this.need(8)
    const v = this.buf.readDoubleBE(this.pos)
    this.pos += 8
    return v
  }

  bytes(n: number): Uint8Array {
    this.need(n)
    const v = Uint8Array.prototype.slice.call(this.buf, this.pos, this.pos + n)
    this.pos += n
    return v
  }

  /** ASCII line up to \n (protocol 0 text opcodes). */
  line(): string {
    const end = this.buf.indexOf(0x0a, this.pos)
    if (end < 0) throw new PickleError(`truncated pickle: unterminated line at offset ${this.pos}`)
    const s = this.buf.toString('latin1', this.pos, end)
    this.pos = end + 1
    return s.endsWith('\r') ? s.slice(0, -1) : s
  }

  utf8(n: number): string {
    this.need(n)
    const s = this.buf.toString('utf8', this.pos, this.pos + n)
    this.pos += n
    return s
  }
}

class Unpickler {
  private readonly r: Reader
  private readonly stack: unknown[] = []
  private readonly memo = new Map<number, unknown>()

  constructor(buf: Buffer) {
    this.r = new Reader(buf)
  }

  private pop(): unknown {
    if (this.stack.length === 0) throw new PickleError('pickle stack underflow')
    return this.stack.pop()
  }

  private popMark(): unknown[] {
    const idx = this.stack.lastIndexOf(MARK)
    if (idx < 0) throw new PickleError('pickle stack has no mark')
    const items = this.stack.splice(idx + 1)
    this.stack.pop()
    return items
  }

  private resolveGlobal(module: string, name: string): unknown {
    return new PyGlobal(module, name)
  }

  private call(callable: unknown, args: unknown[], via: string): unknown {
    if (callable instanceof PyGlobal) {
      const reducer = REDUCERS[callable.qualname]
      if (reducer) return reducer(args)
      // unknown class or factory: keep a shell so callers can report it
      return new PyShell(callable.qualname, args)
    }
    if (callable instanceof PyShell) return new PyShell(`${callable.cls}()`, args)
    throw new PickleError(`${via}: cannot call ${String(callable)}`)
  }

  private setItems(target: unknown, pairs: unknown[], via: string): void {
    if (pairs.length % 2 !== 0) throw new PickleError(`${via}: odd number of items`)
    const put =
      target instanceof Map
        ? (k: unknown, v: unknown) => target.set(k, v)
        : target instanceof PyShell
          ? (k: unknown, v: unknown) => target.dictItems.set(k, v)
          : null
    if (!put) throw new PickleError(`${via}: target is not a dict`)
    for (let i = 0; i < pairs.length; i += 2) put(pairs[i], pairs[i + 1])
  }

  private appendItems(target: unknown, items: unknown[], via: string): void {
    if (Array.isArray(target)) target.push(...items)
    else if (target instanceof PyShell) target.listItems.push(...items)
    else throw new PickleError(`${via}: target is not a list`)
  }

  private build(state: unknown): void {
    // mutate in place: the memo may already reference the object
    const obj = this.stack[this.stack.length - 1]
    if (obj instanceof NDArray) {
      applyArrayState(obj, state)
      return
    }
    if (obj instanceof NpDtype) {
      obj.applyState(asTuple(state, 'dtype state'))
      return
    }
    if (obj instanceof PyShell) {
      obj.state = state
      return
    }
    throw new PickleError('BUILD on an object without state support')
  }

  load(): unknown {
    const r = this.r
    for (;;) {
      const op = r.u1()
      switch (op) {
        case 0x80: // PROTO
          r.u1()
          break
        case 0x95: // FRAME
          r.u8()
          break
        case 0x2e: // STOP
          return this.pop()

        case 0x28: // MARK
          this.stack.push(MARK)
          break
        case 0x30: // POP
          this.pop()
          break
        case 0x31: // POP_MARK
          this.popMark()
          break
        case 0x32: // DUP
          this.stack.push(this.stack[this.stack.length - 1])
          break

        case 0x4e: // NONE
          this.stack.push(null)
          break
        case 0x88: // NEWTRUE
          this.stack.push(true)
          break
        case 0x89: // NEWFALSE
          this.stack.push(false)
          break

        case 0x49: // INT (text)
          this.stack.push(parsePyInt(r.line()))
          break
        case 0x4a: // BININT
          this.stack.push(r.i4())
          break
        case 0x4b: // BININT1
          this.stack.push(r.u1())
          break
        case 0x4d: // BININT2
          this.stack.push(r.u2())
          break
        case 0x4c: {
          // LONG (text)
          const t = r.line()
          this.stack.push(fitInt(BigInt(t.endsWith('L') ? t.slice(0, -1) : t)))
          break
        }
        case 0x8a: // LONG1
          this.stack.push(decodeLong(r.bytes(r.u1())))
          break
        case 0x8b: // LONG4
          this.stack.push(decodeLong(r.bytes(r.u4())))
          break

        case 0x46: // FLOAT (text)
          this.stack.push(parseFloat(r.line()))
          break
        case 0x47: // BINFLOAT
          this.stack.push(r.f8be())
          break

        case 0x53: {
          // STRING (text, repr-quoted)
          const t = r.line()
          const q = t[0]
          if ((q !== "'" && q !== '"') || t[t.length - 1] !== q)
            throw new PickleError('STRING opcode: no quotes')
          this.stack.push(unescapePyString(t.slice(1, -1)))
          break
        }
        case 0x54: // BINSTRING
          this.stack.push(Buffer.from(r.bytes(r.u4())).toString('latin1'))
          break
        case 0x55: // SHORT_BINSTRING
          this.stack.push(Buffer.from(r.bytes(r.u1())).toString('latin1'))
          break
        case 0x56: // UNICODE (text)
          this.stack.push(unescapePyString(r.line()))
          break
        case 0x58: // BINUNICODE
          this.stack.push(r.utf8(r.u4()))
          break
        case 0x8c: // SHORT_BINUNICODE
          this.stack.push(r.utf8(r.u1()))
          break
        case 0x8d: // BINUNICODE8
          this.stack.push(r.utf8(r.u8()))
          break

        case 0x42: // BINBYTES
          this.stack.push(r.bytes(r.u4()))
          break
        case 0x43: // SHORT_BINBYTES
          this.stack.push(r.bytes(r.u1()))
          break
        case 0x8e: // BINBYTES8
          this.stack.push(r.bytes(r.u8()))
          break
        case 0x96: // BYTEARRAY8
          this.stack.push(r.bytes(r.u8()))
          break

        case 0x5d: // EMPTY_LIST
          this.stack.push([])
          break
        case 0x6c: // LIST
          this.stack.push(this.popMark())
          break
        case 0x61: {
          // APPEND
          const v = this.pop()
          this.appendItems(this.stack[this.stack.length - 1], [v], 'APPEND')
          break
        }
        case 0x65: {
          // APPENDS
          const items = this.popMark()
          this.appendItems(this.stack[this.stack.length - 1], items, 'APPENDS')
          break
        }

        case 0x29: // EMPTY_TUPLE
          this.stack.push(new PyTuple())
          break
        case 0x74: // TUPLE
          this.stack.push(PyTuple.from(this.popMark()))
          break
        case 0x85: // TUPLE1
          this.stack.push(PyTuple.from([this.pop()]))
          break
        case 0x86: {
          // TUPLE2
          const b = this.pop()
          const a = this.pop()
          this.stack.push(PyTuple.from([a, b]))
          break
        }
        case 0x87: {
          // TUPLE3
          const c = this.pop()
          const b = this.pop()
          const a = this.pop()
          this.stack.push(PyTuple.from([a, b, c]))
          break
        }

        case 0x7d: // EMPTY_DICT
          this.stack.push(new Map())
          break
        case 0x64: {
          // DICT
          const m = new Map()
          this.setItems(m, this.popMark(), 'DICT')
          this.stack.push(m)
          break
        }
        case 0x73: {
          // SETITEM
          const v = this.pop()
          const k = this.pop()
          this.setItems(this.stack[this.stack.length - 1], [k, v], 'SETITEM')
          break
        }
        case 0x75: {
          // SETITEMS
          const items = this.popMark()
          this.setItems(this.stack[this.stack.length - 1], items, 'SETITEMS')
          break
        }

        case 0x8f: // EMPTY_SET
          this.stack.push(new Set())
          break
        case 0x90: {
          // ADDITEMS
          const items = this.popMark()
          const s = this.stack[this.stack.length - 1]
          if (!(s instanceof Set)) throw new PickleError('ADDITEMS: target is not a set')
          for (const it of items) s.add(it)
          break
        }
        case 0x91: // FROZENSET
          this.stack.push(new Set(this.popMark()))
          break

        case 0x67: {
          // GET (text)
          const k = Number(r.line())
          if (!this.memo.has(k)) throw new PickleError(`memo key ${k} not set`)
          this.stack.push(this.memo.get(k))
          break
        }
        case 0x68: {
          // BINGET
          const k = r.u1()
          if (!this.memo.has(k)) throw new PickleError(`memo key ${k} not set`)
          this.stack.push(this.memo.get(k))
          break
        }
        case 0x6a: {
          // LONG_BINGET
          const k = r.u4()
          if (!this.memo.has(k)) throw new PickleError(`memo key ${k} not set`)
          this.stack.push(this.memo.get(k))
          break
        }
        case 0x70: // PUT (text)
          this.memo.set(Number(r.line()), this.stack[this.stack.length - 1])
          break
        case 0x71: // BINPUT
          this.memo.set(r.u1(), this.stack[this.stack.length - 1])
          break
        case 0x72: // LONG_BINPUT
          this.memo.set(r.u4(), this.stack[this.stack.length - 1])
          break
        case 0x94: // MEMOIZE
          this.memo.set(this.memo.size, this.stack[this.stack.length - 1])
          break

        case 0x63: {
          // GLOBAL (text)
          const module = r.line()
          const name = r.line()
          this.stack.push(this.resolveGlobal(module, name))
          break
        }
        case 0x93: {
          // STACK_GLOBAL
          const name = this.pop()
          const module = this.pop()
          if (typeof module !== 'string' || typeof name !== 'string')
            throw new PickleError('STACK_GLOBAL: module and name must be strings')
          this.stack.push(this.resolveGlobal(module, name))
          break
        }

        case 0x52: {
          // REDUCE
          const args = asTuple(this.pop(), 'REDUCE args')
          const callable = this.pop()
          this.stack.push(this.call(callable, args, 'REDUCE'))
          break
        }
        case 0x81: {
          // NEWOBJ
          const args = asTuple(this.pop(), 'NEWOBJ args')
          const cls = this.pop()
          this.stack.push(this.call(cls, args, 'NEWOBJ'))
          break
        }
        case 0x92: {
          // NEWOBJ_EX
          const kwargs = this.pop()
          const args = asTuple(this.pop(), 'NEWOBJ_EX args')
          const cls = this.pop()
          if (kwargs instanceof Map && kwargs.size > 0)
            throw new PickleError('NEWOBJ_EX with keyword arguments is not supported')
          this.stack.push(this.call(cls, args, 'NEWOBJ_EX'))
          break
        }
        case 0x62: // BUILD
          this.build(this.pop())
          break
        case 0x69: {
          // INST (text)
          const module = r.line()
          const name = r.line()
          const args = this.popMark()
          this.stack.push(new PyShell(`${module}.${name}`, args))
          break
        }
        case 0x6f: {
          // OBJ
          const items = this.popMark()
          const cls = items.shift()
          this.stack.push(this.call(cls, items, 'OBJ'))
          break
        }

        case 0x50: // PERSID
        case 0x51: // BINPERSID
          throw new PickleError('persistent ids are not supported')
        case 0x82: // EXT1
        case 0x83: // EXT2
        case 0x84: // EXT4
          throw new PickleError('extension registry opcodes are not supported')
        case 0x97: // NEXT_BUFFER
        case 0x98: // READONLY_BUFFER
          throw new PickleError('out-of-band pickle buffers are not supported')

        default:
          throw new PickleError(
            `unknown opcode 0x${op.toString(16).padStart(2, '0')} at offset ${r.pos - 1}`,
          )
      }
    }
  }
}

/** Load one pickled object from a buffer. */
export function loads(buf: Buffer): unknown {
  if (buf.length === 0) throw new PickleError('truncated pickle: empty file')
  return new Unpickler(buf).load()
}

export { NDArray, NpDtype }
