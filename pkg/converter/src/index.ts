export { convertCharacter, inspectCharacter, CharacterXmlError } from './character.js'
export { main } from './cli.js'
export { convertMotion, inspectMotion, UnknownSchemaError } from './motion.js'
export { loads, NDArray, NpDtype, PickleError, PyGlobal, PyShell, PyTuple } from './pickle.js'
export { ConversionReport, formatReport, writeJsonAtomic } from './report.js'
export { describe } from './structure.js'
export {
  characterFrameWidth,
  validateCharacterDoc,
  validateMotionDoc,
  ValidationError,
} from './validate.js'
export type { BodyDoc, CharacterDoc, JointDoc, MotionDoc } from './validate.js'
export { parseXml, XmlError } from './xml.js'
