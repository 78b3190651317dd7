/** Conversion reports and output writing shared by both converters. */

import { mkdirSync, renameSync, writeFileSync } from 'fs'
import { dirname } from 'path'

export interface ConversionReport {
  input: string
  output: string
  /** frame rows for motions, 0 for characters */
  frames: number
  /** columns per frame row; for characters, the width their clips must have */
  frameWidth: number
  /** null for characters */
  fps: number | null
  warnings: string[]
}

/** Write via a temp file and rename, so no partial output can be left. */
export function writeJsonAtomic(path: string, doc: unknown, indent?: number): void {
  mkdirSync(dirname(path), { recursive: true })
  const tmp = path + '.tmp'
  writeFileSync(tmp, JSON.stringify(doc, null, indent))
  renameSync(tmp, path)
}

export function formatReport(r: ConversionReport): string {
  const what =
    r.fps === null
      ? `frame width ${r.frameWidth}`
      : `${r.frames} frames, width ${r.frameWidth}, ${r.fps} fps`
  return `wrote ${r.output} (${what})`
}
