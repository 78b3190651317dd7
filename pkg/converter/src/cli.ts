#!/usr/bin/env node
/**
 * Batch conversion entry point.
 *
 *   motion-converter [--out-dir DIR] [--character NAME] <inputs...>
 *
 * .pkl inputs become motion-clip JSON, .xml inputs become character JSON.
 * Exit code 0 only if every input converted and validated; failed inputs
 * produce no output file.
 */

import { basename, dirname, join } from 'path'
import { pathToFileURL } from 'url'

import { convertCharacter } from './character.js'
import { convertMotion } from './motion.js'
import { ConversionReport, formatReport } from './report.js'

const USAGE = `usage: motion-converter [--out-dir DIR] [--character NAME] <input.pkl|input.xml> ...

Converts pickled motion clips (.pkl) and MuJoCo-style characters (.xml)
to the JSON formats the training package loads. Output files are named
after the input, with a .json extension, in --out-dir (default: next to
each input). The exit code is 0 only if all conversions validate.`

interface Args {
  inputs: string[]
  outDir: string | null
  character: string | null
}

class ArgsError extends Error {}

function parseArgs(argv: string[]): Args {
  const args: Args = { inputs: [], outDir: null, character: null }
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]
    if (a === '--out-dir' || a === '--character') {
      const v = argv[++i]
      if (v === undefined) throw new ArgsError(`${a} is missing a value`)
      if (a === '--out-dir') args.outDir = v
      else args.character = v
    } else if (a === '--help' || a === '-h') {
      throw new ArgsError('')
    } else if (a.startsWith('-')) {
      throw new ArgsError(`unknown option ${a}`)
    } else {
      args.inputs.push(a)
    }
  }
  if (args.inputs.length === 0) throw new ArgsError('no input files given')
  return args
}

function outputPath(input: string, outDir: string | null): string {
  const stem = basename(input).replace(/\.[^.]*$/, '')
  return join(outDir ?? dirname(input), stem + '.json')
}

function convertOne(input: string, args: Args): ConversionReport {
  const out = outputPath(input, args.outDir)
  if (/\.(pkl|pickle)$/i.test(input)) return convertMotion(input, out, args.character ?? undefined)
  if (/\.xml$/i.test(input)) return convertCharacter(input, out)
  throw new Error(`cannot tell what '${input}' is; expected a .pkl or .xml file`)
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (e) {
    const msg = (e as Error).message
    if (msg) console.error(`error: ${msg}`)
    console.error(USAGE)
    return msg ? 2 : 0
  }

  let failed = 0
  for (const input of args.inputs) {
    try {
      const report = convertOne(input, args)
      for (const warning of report.warnings) console.error(`warning: ${input}: ${warning}`)
      console.log(formatReport(report))
    } catch (e) {
      const err = e as NodeJS.ErrnoException
      const msg = err.code === 'ENOENT' ? 'no such file' : err.message
      console.error(`error: ${input}: ${msg}`)
      failed++
    }
  }
  return failed === 0 ? 0 : 1
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href)
  process.exit(main(process.argv.slice(2)))
