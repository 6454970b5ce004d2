/**
 * Catalog snapshot: estimated row count per relation, loaded once at startup.
 *
 * Sources, in order of preference: a JSON file ({"relation": rows, ...}) or a
 * live DBMS queried through the psql client. Relations missing from the
 * snapshot fall back to a configured default, so an incomplete catalog
 * degrades the plan quality, never the protocol.
 */

import { execFileSync } from 'node:child_process';
import { readFileSync } from 'node:fs';

export const DEFAULT_FALLBACK_ROWS = 1000;

export class CatalogSnapshot {
  private readonly rows: Map<string, number>;
  readonly fallbackRows: number;

  constructor(rows: Map<string, number>, fallbackRows: number = DEFAULT_FALLBACK_ROWS) {
    this.rows = rows;
    this.fallbackRows = fallbackRows;
  }

  rowsFor(relation: string): number {
    return this.rows.get(relation.toLowerCase()) ?? this.fallbackRows;
  }

  get size(): number {
    return this.rows.size;
  }
}

export function catalogFromObject(
  doc: Record<string, number>,
  fallbackRows: number = DEFAULT_FALLBACK_ROWS,
): CatalogSnapshot {
  const rows = new Map<string, number>();
  for (const [relation, count] of Object.entries(doc)) {
    if (typeof count !== 'number' || !Number.isFinite(count) || count < 0) {
      throw new Error(`catalog entry ${relation} has a bad row count: ${count}`);
    }
    rows.set(relation.toLowerCase(), count);
  }
  return new CatalogSnapshot(rows, fallbackRows);
}

export function catalogFromFile(path: string, fallbackRows?: number): CatalogSnapshot {
  const doc: unknown = JSON.parse(readFileSync(path, 'utf-8'));
  if (typeof doc !== 'object' || doc === null || Array.isArray(doc)) {
    throw new Error(`catalog file ${path} must hold a {"relation": rows} object`);
  }
  return catalogFromObject(doc as Record<string, number>, fallbackRows);
}

/** Row estimates from the table statistics of a live server, via psql. */
export function catalogFromDsn(dsn: string, fallbackRows?: number): CatalogSnapshot {
  const sql =
    "SELECT relname, GREATEST(reltuples, 0)::bigint FROM pg_class WHERE relkind IN ('r', 'm', 'p')";
  const output = execFileSync('psql', [dsn, '--no-psqlrc', '-tA', '-c', sql], {
    encoding: 'utf-8',
  });
  const rows = new Map<string, number>();
  for (const line of output.split('\n')) {
    if (!line.trim()) continue;
    const [relation, count] = line.split('|');
    if (relation && count !== undefined) {
      rows.set(relation.toLowerCase(), Number(count));
    }
  }
  return new CatalogSnapshot(rows, fallbackRows);
}
