/**
 * Greedy left-deep planning: join relations in ascending estimated-row
 * order, hash joins and sequential scans everywhere.
 *
 * The rendered hint follows the harness grammar exactly: a Leading clause
 * with nested outer/inner groups, one join atom per level naming the sorted
 * alias set, and one scan atom per relation in leaf order.
 */

import type { CatalogSnapshot } from './catalog.js';
import { relationsOf, UnparseableFrom, type RelationRef } from './fromClause.js';

interface Costed extends RelationRef {
  rows: number;
}

/** Ascending row count, alphabetical alias as the tie-break. */
export function joinOrder(refs: RelationRef[], catalog: CatalogSnapshot): Costed[] {
  return refs
    .map((ref) => ({ ...ref, rows: catalog.rowsFor(ref.table) }))
    .sort((a, b) => a.rows - b.rows || (a.alias < b.alias ? -1 : a.alias > b.alias ? 1 : 0));
}

/** Nested leading group of the left-deep fold: ((a c) b) for [a, c, b]. */
export function leadingGroup(aliases: string[]): string {
  let group = aliases[0]!;
  for (const alias of aliases.slice(1)) {
    group = `(${group} ${alias})`;
  }
  return group;
}

export function renderLeftDeepHints(aliases: string[]): string {
  const atoms: string[] = [`Leading(${leadingGroup(aliases)})`];
  for (let level = 2; level <= aliases.length; level += 1) {
    const names = aliases.slice(0, level).sort();
    atoms.push(`HashJoin(${names.join(' ')})`);
  }
  for (const alias of aliases) {
    atoms.push(`SeqScan(${alias})`);
  }
  return `/*+ ${atoms.join(' ')} */`;
}

/**
 * The hint comment for one query, or an empty string when the query has
 * fewer than two relations or its FROM clause cannot be read.
 */
export function heuristicPlan(sql: string, catalog: CatalogSnapshot): string {
  let refs: RelationRef[];
  try {
    refs = relationsOf(sql);
  } catch (error) {
    if (error instanceof UnparseableFrom) return '';
    throw error;
  }
  if (refs.length < 2) return '';
  const ordered = joinOrder(refs, catalog);
  return renderLeftDeepHints(ordered.map((r) => r.alias));
}

/** One-line audit trail for the response meta field. */
export function planMeta(sql: string, catalog: CatalogSnapshot): string {
  try {
    const ordered = joinOrder(relationsOf(sql), catalog);
    return ordered.map((r) => `${r.alias}=${r.rows}`).join(' ');
  } catch {
    return 'unparseable FROM clause; empty directive';
  }
}
