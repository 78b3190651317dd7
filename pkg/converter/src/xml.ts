/**
 * Minimal XML reader for MuJoCo-style model files: elements, attributes,
 * self-closing tags, comments, and prolog. No text content (these files
 * have none), no namespaces, no DTD internals.
 */

export class XmlError extends Error {}

export interface XmlElement {
  tag: string
  attrs: Record<string, string>
  children: XmlElement[]
  line: number
}

const NAME_RE = /^[A-Za-z_:][A-Za-z0-9_:.-]*/

const ENTITIES: Record<string, string> = {
  amp: '&',
  lt: '<',
  gt: '>',
  quot: '"',
  apos: "'",
}

function decodeEntities(s: string, line: number): string {
  return s.replace(/&([^;]{1,8});/g, (_, name: string) => {
    if (name.startsWith('#x') || name.startsWith('#X'))
      return String.fromCodePoint(parseInt(name.slice(2), 16))
    if (name.startsWith('#')) return String.fromCodePoint(parseInt(name.slice(1), 10))
    const v = ENTITIES[name]
    if (v === undefined) throw new XmlError(`line ${line}: unknown entity &${name};`)
    return v
  })
}

class Scanner {
  pos = 0
  line = 1

  constructor(readonly text: string) {}

  eof(): boolean {
    return this.pos >= this.text.length
  }

  peek(): string {
    return this.text[this.pos]
  }

  advance(n: number): void {
    for (let i = 0; i < n; i++) if (this.text[this.pos + i] === '\n') this.line++
    this.pos += n
  }

  skipWhitespace(): void {
    while (!this.eof() && /\s/.test(this.peek())) this.advance(1)
  }

  startsWith(s: string): boolean {
    return this.text.startsWith(s, this.pos)
  }

  skipUntil(close: string, what: string): void {
    const idx = this.text.indexOf(close, this.pos)
    if (idx < 0) throw new XmlError(`line ${this.line}: unterminated ${what}`)
    this.advance(idx + close.length - this.pos)
  }

  name(what: string): string {
    const m = NAME_RE.exec(this.text.slice(this.pos))
    if (!m) throw new XmlError(`line ${this.line}: expected ${what}`)
    this.advance(m[0].length)
    return m[0]
  }

  quoted(): string {
    const q = this.peek()
    if (q !== '"' && q !== "'")
      throw new XmlError(`line ${this.line}: attribute value must be quoted`)
    const end = this.text.indexOf(q, this.pos + 1)
    if (end < 0) throw new XmlError(`line ${this.line}: unterminated attribute value`)
    const raw = this.text.slice(this.pos + 1, end)
    const line = this.line
    this.advance(end + 1 - this.pos)
    return decodeEntities(raw, line)
  }
}

function parseElement(s: Scanner): XmlElement {
  const line = s.line
  s.advance(1) // '<'
  const tag = s.name('a tag name')
  const attrs: Record<string, string> = {}
  for (;;) {
    s.skipWhitespace()
    if (s.eof()) throw new XmlError(`line ${s.line}: unterminated <${tag}> tag`)
    if (s.startsWith('/>')) {
      s.advance(2)
      return { tag, attrs, children: [], line }
    }
    if (s.peek() === '>') {
      s.advance(1)
      break
    }
    const name = s.name(`an attribute name in <${tag}>`)
    s.skipWhitespace()
    if (s.peek() !== '=') throw new XmlError(`line ${s.line}: attribute '${name}' has no value`)
    s.advance(1)
    s.skipWhitespace()
    if (name in attrs) throw new XmlError(`line ${s.line}: duplicate attribute '${name}'`)
    attrs[name] = s.quoted()
  }

  const children: XmlElement[] = []
  for (;;) {
    s.skipWhitespace()
    if (s.eof()) throw new XmlError(`line ${line}: <${tag}> is never closed`)
    if (s.startsWith('<!--')) {
      s.skipUntil('-->', 'comment')
      continue
    }
    if (s.startsWith('</')) {
      s.advance(2)
      const closing = s.name('the closing tag name')
      if (closing !== tag)
        throw new XmlError(`line ${s.line}: </${closing}> does not match <${tag}> from line ${line}`)
      s.skipWhitespace()
      if (s.peek() !== '>') throw new XmlError(`line ${s.line}: malformed closing tag`)
      s.advance(1)
      return { tag, attrs, children, line }
    }
    if (s.peek() === '<') {
      children.push(parseElement(s))
      continue
    }
    throw new XmlError(`line ${s.line}: unexpected text content inside <${tag}>`)
  }
}

/** Parse a document and return its root element. */
export function parseXml(text: string): XmlElement {
  const s = new Scanner(text)
  let root: XmlElement | null = null
  while (!s.eof()) {
    s.skipWhitespace()
    if (s.eof()) break
    if (s.startsWith('<?')) {
      s.skipUntil('?>', 'processing instruction')
      continue
    }
    if (s.startsWith('<!--')) {
      s.skipUntil('-->', 'comment')
      continue
    }
    if (s.startsWith('<!')) {
      s.skipUntil('>', 'declaration')
      continue
    }
    if (s.peek() === '<') {
      if (root) throw new XmlError(`line ${s.line}: more than one top-level element`)
      root = parseElement(s)
      continue
    }
    throw new XmlError(`line ${s.line}: unexpected text outside elements`)
  }
  if (!root) throw new XmlError('document has no elements')
  return root
}
