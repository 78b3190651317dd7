/**
 * Conversion of pickled motion clips to the training package's JSON
 * clip format: {fps, loop, character, frames}.
 *
 * Accepted pickle layouts (inspected dynamically, no guessing):
 *   - dict with a 'frames' matrix and optional 'fps', 'loop'/'loop_mode',
 *     'character' entries,
 *   - a bare 2-D float array,
 *   - a bare list of equal-width number rows.
 * Frame values are copied as-is; no resampling or reordering. Anything
 * else raises UnknownSchemaError carrying a structure dump of the file.
 */

import { readFileSync } from 'fs'
import { basename } from 'path'

import { loads, NDArray } from './pickle.js'
import { ConversionReport, writeJsonAtomic } from './report.js'
import { describe } from './structure.js'
import { MotionDoc, validateMotionDoc } from './validate.js'

export class UnknownSchemaError extends Error {
  constructor(reason: string, obj: unknown) {
    super(`unrecognized motion layout: ${reason}\nfile contains: ${describe(obj)}`)
  }
}

export interface MotionConversion {
  doc: MotionDoc
  /** null when neither the file nor the caller named the character */
  character: string | null
  warnings: string[]
}

const DEFAULT_FPS = 30

/** Loop-mode spellings seen in motion tooling, mapped to ours. */
const LOOP_ALIASES: Record<string, string> = {
  none: 'none',
  clamp: 'none',
  wrap: 'wrap',
  loop: 'wrap',
}

function toNumber(v: unknown): number | null {
  if (typeof v === 'number') return v
  if (typeof v === 'bigint') {
    const n = Number(v)
    return BigInt(n) === v ? n : null
  }
  return null
}

function framesFromRows(rows: unknown, obj: unknown): number[][] {
  if (rows instanceof NDArray) {
    if (rows.ndim !== 2)
      throw new UnknownSchemaError(`frames array has ${rows.ndim} dimension(s), expected 2`, obj)
    return rows.nested() as number[][]
  }
  if (Array.isArray(rows) && rows.length > 0 && Array.isArray(rows[0])) {
    const out: number[][] = []
    for (const row of rows as unknown[]) {
      if (!Array.isArray(row)) throw new UnknownSchemaError('frame rows are not all arrays', obj)
      const nums: number[] = []
      for (const v of row) {
        const n = toNumber(v)
        if (n === null) throw new UnknownSchemaError('frame rows contain non-numbers', obj)
        nums.push(n)
      }
      out.push(nums)
    }
    return out
  }
  throw new UnknownSchemaError("the 'frames' entry is not a 2-D array", obj)
}

/** Map an unpickled object to clip fields, or fail with its structure. */
export function inspectMotion(obj: unknown, characterName?: string): MotionConversion {
  const warnings: string[] = []
  let frames: number[][]
  let fps: number | null = null
  let loop: string | null = null
  let character: string | null = null

  if (obj instanceof Map) {
    if (!obj.has('frames')) throw new UnknownSchemaError("dict has no 'frames' key", obj)
    frames = framesFromRows(obj.get('frames'), obj)
    const known = new Set(['frames', 'fps', 'loop', 'loop_mode', 'character'])
    const extra = [...obj.keys()].filter((k) => !known.has(k as string))
    if (extra.length) warnings.push(`ignored entries: ${extra.map((k) => String(k)).join(', ')}`)

    if (obj.has('fps')) {
      fps = toNumber(obj.get('fps'))
      if (fps === null) throw new UnknownSchemaError("the 'fps' entry is not a number", obj)
    }
    const loopKey = obj.has('loop') ? 'loop' : obj.has('loop_mode') ? 'loop_mode' : null
    if (loopKey) {
      const raw = obj.get(loopKey)
      if (typeof raw !== 'string')
        throw new UnknownSchemaError(`the '${loopKey}' entry is not a string`, obj)
      const mapped = LOOP_ALIASES[raw.toLowerCase()]
      if (!mapped) throw new UnknownSchemaError(`unknown loop mode '${raw}'`, obj)
      if (mapped !== raw) warnings.push(`loop mode '${raw}' written as '${mapped}'`)
      loop = mapped
    }
    if (obj.has('character')) {
      const raw = obj.get('character')
      if (typeof raw !== 'string')
        throw new UnknownSchemaError("the 'character' entry is not a string", obj)
      character = raw
    }
  } else if (obj instanceof NDArray || Array.isArray(obj)) {
    frames = framesFromRows(obj, obj)
  } else {
    throw new UnknownSchemaError('expected a dict or a frame matrix at the top level', obj)
  }

  if (fps === null) {
    fps = DEFAULT_FPS
    warnings.push(`no fps in file, defaulted to ${DEFAULT_FPS}`)
  }
  if (loop === null) {
    loop = 'none'
    warnings.push("no loop mode in file, defaulted to 'none'")
  }
  if (characterName) character = characterName

  return { doc: { fps, loop, character: character ?? '', frames }, character, warnings }
}

/** Convert one .pkl clip; writes outPath only after validation passes. */
export function convertMotion(
  pklPath: string,
  outPath: string,
  characterName?: string,
): ConversionReport {
  const buf = readFileSync(pklPath)
  const obj = loads(buf)
  const { doc, character, warnings } = inspectMotion(obj, characterName)
  if (character === null) {
    doc.character = basename(pklPath).replace(/\.[^.]*$/, '')
    warnings.push(`no character name in file, wrote '${doc.character}'`)
  }
  validateMotionDoc(doc)
  writeJsonAtomic(outPath, doc)
  return {
    input: pklPath,
    output: outPath,
    frames: doc.frames.length,
    frameWidth: doc.frames[0].length,
    fps: doc.fps,
    warnings,
  }
}
