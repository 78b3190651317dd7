/**
 * Validation of the JSON documents the converter emits, mirroring the
 * loader rules of the training package: a conversion only counts as
 * successful (and is only written to disk) if its output passes these.
 */

export class ValidationError extends Error {}

export const LOOP_MODES = ['none', 'wrap'] as const
export const JOINT_KINDS = ['spherical', 'revolute', 'fixed'] as const
export const JOINT_DOF: Record<string, number> = { spherical: 3, revolute: 1, fixed: 0 }

export interface MotionDoc {
  fps: number
  loop: string
  character: string
  frames: number[][]
}

export interface JointDoc {
  name: string
  kind: string
  parent: number
  local_offset: number[]
  axis?: number[]
  torque_limit?: number
  pd_gains?: number[]
}

export interface BodyDoc {
  name: string
  mass?: number
  inertia?: number
  shape?: string
  size?: number[]
  com?: number[]
}

export interface CharacterDoc {
  name: string
  up_axis: string
  root_fixed: boolean
  joints: JointDoc[]
  bodies: BodyDoc[]
  extras?: Record<string, unknown>
}

function fail(msg: string): never {
  throw new ValidationError(msg)
}

function checkFinite(values: number[], what: string): void {
  for (const v of values)
    if (typeof v !== 'number' || !Number.isFinite(v)) fail(`${what}: non-finite entry ${v}`)
}

export function validateMotionDoc(doc: MotionDoc): void {
  if (!Number.isFinite(doc.fps) || doc.fps <= 0) fail(`fps must be positive, got ${doc.fps}`)
  if (!LOOP_MODES.includes(doc.loop as never))
    fail(`loop must be one of ${LOOP_MODES.join(', ')}, got '${doc.loop}'`)
  if (typeof doc.character !== 'string' || !doc.character) fail('character name must be set')
  if (!Array.isArray(doc.frames) || doc.frames.length === 0) fail('frames must be non-empty')
  const width = Array.isArray(doc.frames[0]) ? doc.frames[0].length : -1
  if (width < 1) fail('frame rows must be non-empty arrays')
  doc.frames.forEach((row, k) => {
    if (!Array.isArray(row) || row.length !== width)
      fail(`row ${k}: width ${Array.isArray(row) ? row.length : 'n/a'}, expected ${width}`)
    checkFinite(row, `row ${k}`)
  })
}

export function jointDof(kind: string): number {
  const dof = JOINT_DOF[kind]
  if (dof === undefined) fail(`unknown joint kind '${kind}'`)
  return dof
}

/** Frame width the training package derives: root pos + root rot + dofs. */
export function characterFrameWidth(doc: CharacterDoc): number {
  return 6 + doc.joints.reduce((acc, j) => acc + jointDof(j.kind), 0)
}

export function validateCharacterDoc(doc: CharacterDoc): void {
  if (typeof doc.name !== 'string' || !doc.name) fail('character name must be set')
  if (doc.up_axis !== 'y' && doc.up_axis !== 'z') fail(`unsupported up_axis '${doc.up_axis}'`)
  if (doc.bodies.length !== doc.joints.length + 1)
    fail(`expected ${doc.joints.length + 1} bodies (root + one per joint), got ${doc.bodies.length}`)

  doc.joints.forEach((j, i) => {
    const tag = `joint '${j.name}'`
    jointDof(j.kind)
    if (!Number.isInteger(j.parent) || j.parent < -1 || j.parent >= i)
      fail(`${tag}: parent index ${j.parent} must be -1 <= p < ${i} (depth-first order)`)
    if (!Array.isArray(j.local_offset) || j.local_offset.length !== 3)
      fail(`${tag}: local_offset must have 3 components`)
    checkFinite(j.local_offset, `${tag} local_offset`)
    if (j.kind === 'revolute') {
      if (!j.axis || j.axis.length !== 3) fail(`${tag}: revolute joint has no axis`)
      checkFinite(j.axis, `${tag} axis`)
      const n = Math.hypot(j.axis[0], j.axis[1], j.axis[2])
      if (Math.abs(n - 1) > 1e-6) fail(`${tag}: axis must be unit length, |axis| = ${n}`)
    }
    if (j.torque_limit !== undefined) checkFinite([j.torque_limit], `${tag} torque_limit`)
    if (j.pd_gains !== undefined) {
      if (j.pd_gains.length !== 2) fail(`${tag}: pd_gains must be [kp, kd]`)
      checkFinite(j.pd_gains, `${tag} pd_gains`)
    }
  })

  doc.bodies.forEach((b, i) => {
    const tag = `body ${i} ('${b.name}')`
    if (typeof b.name !== 'string' || !b.name) fail(`body ${i}: name must be set`)
    if (b.mass !== undefined) checkFinite([b.mass], `${tag} mass`)
    if (b.inertia !== undefined) checkFinite([b.inertia], `${tag} inertia`)
    if (b.size !== undefined) checkFinite(b.size, `${tag} size`)
    if (b.com !== undefined) checkFinite(b.com, `${tag} com`)
    if (b.mass !== undefined && b.mass < 0) fail(`${tag}: negative mass`)
  })

  // forward kinematics at the zero pose: identity rotations reduce the
  // body positions to offset accumulation down the tree
  const pos: number[][] = [[0, 0, 0]]
  doc.joints.forEach((j) => {
    const p = pos[j.parent + 1]
    const world = [p[0] + j.local_offset[0], p[1] + j.local_offset[1], p[2] + j.local_offset[2]]
    checkFinite(world, `zero-pose position of body moved by joint '${j.name}'`)
    pos.push(world)
  })
}
