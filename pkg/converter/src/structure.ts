/**
 * Compact structural description of an unpickled object, used to report
 * files whose layout the converter does not recognize.
 */

import { NDArray } from './numpy.js'
import { PyGlobal, PyShell, PyTuple } from './pyvalues.js'

const MAX_DEPTH = 4
const MAX_ITEMS = 8

function pad(depth: number): string {
  return '  '.repeat(depth)
}

function keyRepr(k: unknown): string {
  if (typeof k === 'string') return `'${k}'`
  return String(k)
}

/** One-line or indented multi-line type tree for `obj`. */
export function describe(obj: unknown, depth = 0): string {
  if (obj === null) return 'None'
  if (typeof obj === 'boolean') return `bool ${obj}`
  if (typeof obj === 'number') return `number ${obj}`
  if (typeof obj === 'bigint') return `int ${obj}`
  if (typeof obj === 'string')
    return `str '${obj.length > 40 ? obj.slice(0, 40) + '...' : obj}'`
  if (obj instanceof Uint8Array) return `bytes[${obj.length}]`
  if (obj instanceof NDArray) return `ndarray(${obj.dtype}, shape=[${obj.shape.join(', ')}])`
  if (obj instanceof PyGlobal) return `<${obj.qualname}>`
  if (depth >= MAX_DEPTH) return '...'

  if (obj instanceof PyTuple || Array.isArray(obj)) {
    const kind = obj instanceof PyTuple ? 'tuple' : 'list'
    const items = (obj as unknown[]).slice(0, MAX_ITEMS).map((v) => describe(v, depth + 1))
    const more = obj.length > MAX_ITEMS ? `, ... ${obj.length - MAX_ITEMS} more` : ''
    return `${kind}[${obj.length}] (${items.join(', ')}${more})`
  }
  if (obj instanceof Set) return `set[${obj.size}]`
  if (obj instanceof Map) {
    if (obj.size === 0) return 'dict {}'
    const lines: string[] = []
    let n = 0
    for (const [k, v] of obj) {
      if (++n > MAX_ITEMS) {
        lines.push(`${pad(depth + 1)}... ${obj.size - MAX_ITEMS} more keys`)
        break
      }
      lines.push(`${pad(depth + 1)}${keyRepr(k)}: ${describe(v, depth + 1)}`)
    }
    return `dict {\n${lines.join('\n')}\n${pad(depth)}}`
  }
  if (obj instanceof PyShell) {
    const parts: string[] = []
    if (obj.args.length) parts.push(`args=${describe(PyTuple.from(obj.args), depth + 1)}`)
    if (obj.state !== undefined) parts.push(`state=${describe(obj.state, depth + 1)}`)
    if (obj.dictItems.size) parts.push(`items=${describe(obj.dictItems, depth + 1)}`)
    if (obj.listItems.length) parts.push(`items=${describe(obj.listItems, depth + 1)}`)
    return `instance of ${obj.cls}${parts.length ? ' ' + parts.join(' ') : ''}`
  }
  return `unknown (${typeof obj})`
}
