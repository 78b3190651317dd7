/**
 * Conversion of MuJoCo-style character .xml files to the training
 * package's JSON kinematic-tree format.
 *
 * Supported dialect: a single <body> tree under <worldbody>. Each
 * non-root body carries at most one joint: <joint type="ball">
 * (spherical), <joint type="hinge"> with a unit axis (revolute), or no
 * joint at all (welded, "fixed"). The root body may carry <freejoint/>
 * or <joint type="free"> (floating base) or nothing (fixed base).
 * Joints are emitted in depth-first document order, which is also the
 * order their rotations occupy in motion frames. Constructs outside the
 * dialect fail with an error naming them; nothing is guessed.
 */

import { readFileSync } from 'fs'
import { basename } from 'path'

import { ConversionReport, writeJsonAtomic } from './report.js'
import {
  BodyDoc,
  CharacterDoc,
  characterFrameWidth,
  JointDoc,
  validateCharacterDoc,
} from './validate.js'
import { parseXml, XmlElement } from './xml.js'

export class CharacterXmlError extends Error {}

const DEFAULT_DENSITY = 1000 // kg/m^3, the MuJoCo default

function fail(msg: string): never {
  throw new CharacterXmlError(msg)
}

function parseVec(raw: string, n: number, what: string): number[] {
  const parts = raw.trim().split(/\s+/).map(Number)
  if (parts.length !== n || parts.some((v) => !Number.isFinite(v)))
    fail(`${what}: expected ${n} numbers, got '${raw}'`)
  return parts
}

function parseNum(raw: string, what: string): number {
  const v = Number(raw)
  if (!Number.isFinite(v)) fail(`${what}: expected a number, got '${raw}'`)
  return v
}

function checkUnrotated(el: XmlElement, tag: string): void {
  if (el.attrs.quat !== undefined) {
    const q = parseVec(el.attrs.quat, 4, `${tag} quat`)
    const identity = Math.abs(Math.abs(q[0]) - 1) < 1e-9 && Math.hypot(q[1], q[2], q[3]) < 1e-9
    if (!identity) fail(`${tag}: rotated frames (quat='${el.attrs.quat}') are not supported`)
  }
  if (el.attrs.euler !== undefined) {
    const e = parseVec(el.attrs.euler, 3, `${tag} euler`)
    if (Math.hypot(e[0], e[1], e[2]) > 1e-9)
      fail(`${tag}: rotated frames (euler='${el.attrs.euler}') are not supported`)
  }
}

interface GeomInfo {
  shape: string
  size: number[]
  com: number[]
  mass: number
  volume: number
}

function readGeom(el: XmlElement, bodyName: string): GeomInfo {
  const type = el.attrs.type ?? 'sphere'
  const tag = `body '${bodyName}' geom`
  checkUnrotated(el, tag)
  let shape: string
  let size: number[]
  let com: number[]
  let volume: number

  if (type === 'capsule') {
    shape = 'capsule'
    if (el.attrs.fromto !== undefined) {
      const ft = parseVec(el.attrs.fromto, 6, `${tag} fromto`)
      const d = [ft[3] - ft[0], ft[4] - ft[1], ft[5] - ft[2]]
      const len = Math.hypot(d[0], d[1], d[2])
      const r = parseVec(el.attrs.size ?? '', 1, `${tag} size`)[0]
      size = [len, r]
      com = [(ft[0] + ft[3]) / 2, (ft[1] + ft[4]) / 2, (ft[2] + ft[5]) / 2]
      volume = Math.PI * r * r * len + (4 / 3) * Math.PI * r ** 3
    } else {
      const s = parseVec(el.attrs.size ?? '', 2, `${tag} size`)
      const [r, half] = s
      size = [2 * half, r]
      com = el.attrs.pos ? parseVec(el.attrs.pos, 3, `${tag} pos`) : [0, 0, 0]
      volume = Math.PI * r * r * 2 * half + (4 / 3) * Math.PI * r ** 3
    }
  } else if (type === 'box') {
    const s = parseVec(el.attrs.size ?? '', 3, `${tag} size`)
    shape = 'box'
    size = [2 * s[0], 2 * s[1], 2 * s[2]]
    com = el.attrs.pos ? parseVec(el.attrs.pos, 3, `${tag} pos`) : [0, 0, 0]
    volume = size[0] * size[1] * size[2]
  } else if (type === 'sphere') {
    const r = parseVec(el.attrs.size ?? '', 1, `${tag} size`)[0]
    shape = 'capsule' // zero-length capsule
    size = [0, r]
    com = el.attrs.pos ? parseVec(el.attrs.pos, 3, `${tag} pos`) : [0, 0, 0]
    volume = (4 / 3) * Math.PI * r ** 3
  } else {
    fail(`unsupported geom type '${type}' on body '${bodyName}'`)
  }

  const mass =
    el.attrs.mass !== undefined
      ? parseNum(el.attrs.mass, `${tag} mass`)
      : (el.attrs.density !== undefined
          ? parseNum(el.attrs.density, `${tag} density`)
          : DEFAULT_DENSITY) * volume
  return { shape, size, com, mass, volume }
}

/** Transverse inertia of the body's primitive about its center of mass. */
function shapeInertia(shape: string, size: number[], mass: number): number {
  if (shape === 'box') return (mass * (size[0] ** 2 + size[1] ** 2)) / 12
  const [len, r] = size
  if (len === 0) return 0.4 * mass * r * r // solid sphere
  return (mass * (3 * r * r + len * len)) / 12 // solid cylinder, transverse
}

function bodyDoc(el: XmlElement, name: string, warnings: string[]): BodyDoc {
  const geoms = el.children.filter((c) => c.tag === 'geom').map((g) => readGeom(g, name))
  const inertial = el.children.find((c) => c.tag === 'inertial')

  let mass: number
  let com: number[]
  let shape = 'capsule'
  let size = [0.3, 0.05]
  if (geoms.length > 0) {
    mass = geoms.reduce((a, g) => a + g.mass, 0)
    com = [0, 1, 2].map((k) => geoms.reduce((a, g) => a + g.mass * g.com[k], 0) / (mass || 1))
    shape = geoms[0].shape
    size = geoms[0].size
    if (geoms.length > 1)
      warnings.push(`body '${name}': merged ${geoms.length} geoms, kept the first one's shape`)
  } else {
    mass = 1
    com = [0, 0, 0]
    if (!inertial) warnings.push(`body '${name}': no geom or inertial element, used defaults`)
  }
  let inertia = shapeInertia(shape, size, mass)

  if (inertial) {
    if (inertial.attrs.mass !== undefined)
      mass = parseNum(inertial.attrs.mass, `body '${name}' inertial mass`)
    if (inertial.attrs.pos !== undefined)
      com = parseVec(inertial.attrs.pos, 3, `body '${name}' inertial pos`)
    if (inertial.attrs.diaginertia !== undefined) {
      const d = parseVec(inertial.attrs.diaginertia, 3, `body '${name}' diaginertia`)
      inertia = (d[0] + d[1] + d[2]) / 3
    } else {
      inertia = shapeInertia(shape, size, mass)
    }
  }

  return { name, mass, inertia, shape, size, com }
}

interface Walk {
  joints: JointDoc[]
  bodies: BodyDoc[]
  warnings: string[]
  rootFixed: boolean
  unnamed: number
}

function bodyName(el: XmlElement, w: Walk): string {
  if (el.attrs.name) return el.attrs.name
  const name = `body${w.unnamed++}`
  w.warnings.push(`unnamed body at line ${el.line}, called it '${name}'`)
  return name
}

function jointEntries(el: XmlElement): XmlElement[] {
  return el.children.filter((c) => c.tag === 'joint' || c.tag === 'freejoint')
}

function readJoint(el: XmlElement, name: string, parent: number, offset: number[], w: Walk): JointDoc {
  const jname = el.attrs.name ?? name
  const type = el.tag === 'freejoint' ? 'free' : (el.attrs.type ?? 'hinge')
  const tag = `joint '${jname}'`

  if (type === 'free') fail(`free joint '${jname}' is only allowed on the root body`)
  if (type !== 'ball' && type !== 'hinge')
    fail(`unsupported joint type '${type}' on joint '${jname}'`)
  if (el.attrs.pos !== undefined) {
    const p = parseVec(el.attrs.pos, 3, `${tag} pos`)
    if (Math.hypot(p[0], p[1], p[2]) > 1e-12)
      fail(`${tag}: nonzero joint pos is not supported; fold the offset into the body pos`)
  }

  const doc: JointDoc = {
    name: jname,
    kind: type === 'ball' ? 'spherical' : 'revolute',
    parent,
    local_offset: offset,
  }
  if (type === 'hinge') {
    if (el.attrs.axis === undefined) fail(`revolute joint '${jname}' has no axis`)
    const a = parseVec(el.attrs.axis, 3, `${tag} axis`)
    const n = Math.hypot(a[0], a[1], a[2])
    if (n < 1e-12) fail(`${tag}: axis must be nonzero`)
    doc.axis = a.map((v) => v / n)
  } else if (el.attrs.axis !== undefined) {
    w.warnings.push(`${tag}: axis on a ball joint is ignored`)
  }
  if (el.attrs.stiffness !== undefined || el.attrs.damping !== undefined) {
    const kp = el.attrs.stiffness !== undefined ? parseNum(el.attrs.stiffness, `${tag} stiffness`) : 50
    const kd = el.attrs.damping !== undefined ? parseNum(el.attrs.damping, `${tag} damping`) : 5
    doc.pd_gains = [kp, kd]
  }
  if (el.attrs.actuatorfrcrange !== undefined) {
    const r = parseVec(el.attrs.actuatorfrcrange, 2, `${tag} actuatorfrcrange`)
    doc.torque_limit = Math.max(Math.abs(r[0]), Math.abs(r[1]))
  }
  return doc
}

function walkBody(el: XmlElement, parentJoint: number, w: Walk, isRoot: boolean): void {
  const name = bodyName(el, w)
  checkUnrotated(el, `body '${name}'`)
  const offset = el.attrs.pos ? parseVec(el.attrs.pos, 3, `body '${name}' pos`) : [0, 0, 0]
  const joints = jointEntries(el)
  let myJoint = parentJoint

  if (isRoot) {
    for (const j of joints) {
      const type = j.tag === 'freejoint' ? 'free' : (j.attrs.type ?? 'hinge')
      if (type !== 'free')
        fail(`root body '${name}' may only have a free joint, found type '${type}'`)
      w.rootFixed = false
    }
    if (joints.length > 1) fail(`root body '${name}' has ${joints.length} joints`)
    w.bodies.push(bodyDoc(el, name, w.warnings))
  } else {
    if (joints.length > 1)
      fail(
        `body '${name}' has ${joints.length} joints; compound joints are not supported, use one ball or hinge joint`,
      )
    const joint: JointDoc =
      joints.length === 1
        ? readJoint(joints[0], name, parentJoint, offset, w)
        : { name, kind: 'fixed', parent: parentJoint, local_offset: offset }
    w.joints.push(joint)
    myJoint = w.joints.length - 1
    w.bodies.push(bodyDoc(el, name, w.warnings))
  }

  for (const child of el.children) if (child.tag === 'body') walkBody(child, myJoint, w, false)
}

export interface CharacterConversion {
  doc: CharacterDoc
  warnings: string[]
}

/** Map a parsed XML document to a character document. */
export function inspectCharacter(root: XmlElement, fallbackName: string): CharacterConversion {
  if (root.tag !== 'mujoco') fail(`expected a <mujoco> document, found <${root.tag}>`)
  const worldbody = root.children.find((c) => c.tag === 'worldbody')
  if (!worldbody) fail('document has no <worldbody>')
  const rootBodies = worldbody.children.filter((c) => c.tag === 'body')
  if (rootBodies.length !== 1)
    fail(`expected exactly one root <body> in <worldbody>, found ${rootBodies.length}`)

  const w: Walk = { joints: [], bodies: [], warnings: [], rootFixed: true, unnamed: 0 }
  walkBody(rootBodies[0], -1, w, true)

  const doc: CharacterDoc = {
    name: root.attrs.model ?? fallbackName,
    up_axis: 'z',
    root_fixed: w.rootFixed,
    joints: w.joints,
    bodies: w.bodies,
  }
  return { doc, warnings: w.warnings }
}

/** Convert one .xml character; writes outPath only after validation passes. */
export function convertCharacter(xmlPath: string, outPath: string): ConversionReport {
  const text = readFileSync(xmlPath, 'utf8')
  const root = parseXml(text)
  const { doc, warnings } = inspectCharacter(root, basename(xmlPath).replace(/\.[^.]*$/, ''))
  validateCharacterDoc(doc)
  writeJsonAtomic(outPath, doc, 2)
  return {
    input: xmlPath,
    output: outPath,
    frames: 0,
    frameWidth: characterFrameWidth(doc),
    fps: null,
    warnings,
  }
}
