/**
 * Minimal FROM-clause tokenizer: (table, alias) pairs out of a SQL string.
 *
 * Handles comma-separated relation lists and explicit JOIN chains, quoted
 * strings, comments, and schema-qualified names. It is deliberately not a
 * SQL parser: subqueries or anything else it cannot read raise
 * UnparseableFrom and the caller degrades to an empty directive.
 */

export class UnparseableFrom extends Error {}

export interface RelationRef {
  table: string;
  alias: string;
}

const CLAUSE_TERMINATORS = new Set([
  'where',
  'group',
  'order',
  'having',
  'limit',
  'offset',
  'union',
  'intersect',
  'except',
  'window',
  'fetch',
  'for',
]);

const JOIN_QUALIFIERS = new Set(['inner', 'left', 'right', 'full', 'outer', 'cross', 'natural']);

interface Token {
  text: string;
  depth: number;
}

/** Lex into word/punctuation tokens, skipping quotes and comments. */
function tokenize(sql: string): Token[] {
  const tokens: Token[] = [];
  let depth = 0;
  let i = 0;
  while (i < sql.length) {
    const ch = sql[i]!;
    if (ch === "'" || ch === '"') {
      const quote = ch;
      i += 1;
      while (i < sql.length && sql[i] !== quote) i += 1;
      i += 1;
      tokens.push({ text: quote === "'" ? "'literal'" : '"quoted"', depth });
      continue;
    }
    if (sql.startsWith('--', i)) {
      const end = sql.indexOf('\n', i);
      i = end < 0 ? sql.length : end + 1;
      continue;
    }
    if (sql.startsWith('/*', i)) {
      const end = sql.indexOf('*/', i + 2);
      i = end < 0 ? sql.length : end + 2;
      continue;
    }
    if (ch === '(') {
      tokens.push({ text: '(', depth });
      depth += 1;
      i += 1;
      continue;
    }
    if (ch === ')') {
      depth -= 1;
      tokens.push({ text: ')', depth });
      i += 1;
      continue;
    }
    if (ch === ',' || ch === ';') {
      tokens.push({ text: ch, depth });
      i += 1;
      continue;
    }
    if (/\s/.test(ch)) {
      i += 1;
      continue;
    }
    let j = i;
    while (j < sql.length && /[\w.$]/.test(sql[j]!)) j += 1;
    if (j === i) {
      i += 1; // operator characters are irrelevant here
      continue;
    }
    tokens.push({ text: sql.slice(i, j), depth });
    i = j;
  }
  return tokens;
}

function parseItem(words: string[]): RelationRef {
  // strip join qualifiers that glued onto the front (e.g. "inner join t x")
  while (words.length > 0 && (JOIN_QUALIFIERS.has(words[0]!.toLowerCase()) || words[0]!.toLowerCase() === 'join')) {
    words.shift();
  }
  // cut the ON condition of an explicit join
  const onIndex = words.findIndex((w) => w.toLowerCase() === 'on');
  if (onIndex >= 0) words = words.slice(0, onIndex);
  if (words.length === 0) throw new UnparseableFrom('empty FROM item');
  const first = words[0]!;
  if (first === '(' || first === '"quoted"' || first === "'literal'") {
    throw new UnparseableFrom(`cannot read FROM item starting with ${first}`);
  }
  const table = first.split('.').pop()!.toLowerCase();
  if (!/^[a-z_][\w$]*$/.test(table)) {
    throw new UnparseableFrom(`not a relation name: ${first}`);
  }
  let alias = table;
  if (words.length >= 2) {
    const second = words[1]!.toLowerCase();
    const candidate = second === 'as' ? words[2]?.toLowerCase() : second;
    if (candidate === undefined || !/^[a-z_][\w$]*$/.test(candidate)) {
      throw new UnparseableFrom(`cannot read alias in FROM item: ${words.join(' ')}`);
    }
    alias = candidate;
  }
  return { table, alias };
}

/**
 * Relations of the top-level FROM clause, in appearance order.
 *
 * Throws UnparseableFrom when there is no FROM clause, the clause is empty,
 * an item is a subquery, or two items claim the same alias.
 */
export function relationsOf(sql: string): RelationRef[] {
  const tokens = tokenize(sql);
  const fromIndex = tokens.findIndex((t) => t.depth === 0 && t.text.toLowerCase() === 'from');
  if (fromIndex < 0) throw new UnparseableFrom('no top-level FROM clause');
  const fromDepth = tokens[fromIndex]!.depth;

  const items: string[][] = [];
  let current: string[] = [];
  const flush = () => {
    if (current.length > 0) items.push(current);
    current = [];
  };
  for (let i = fromIndex + 1; i < tokens.length; i += 1) {
    const token = tokens[i]!;
    if (token.depth < fromDepth || (token.depth === fromDepth && token.text === ';')) break;
    if (token.depth === fromDepth && CLAUSE_TERMINATORS.has(token.text.toLowerCase())) break;
    if (token.depth === fromDepth && token.text === ',') {
      flush();
      continue;
    }
    if (token.depth === fromDepth && token.text.toLowerCase() === 'join') {
      flush();
      continue;
    }
    if (token.depth === fromDepth) current.push(token.text);
    else if (current.length === 0) {
      // a parenthesized item (subquery) with nothing before it
      throw new UnparseableFrom('FROM item is a subquery');
    }
  }
  flush();

  if (items.length === 0) throw new UnparseableFrom('FROM clause lists no relations');
  const refs = items.map(parseItem);
  const seen = new Set<string>();
  for (const ref of refs) {
    if (seen.has(ref.alias)) throw new UnparseableFrom(`alias ${ref.alias} appears twice`);
    seen.add(ref.alias);
  }
  return refs;
}
