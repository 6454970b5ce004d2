/**
 * Entry point. The catalog comes from --catalog <file.json> or a live
 * server via --dsn <descriptor> (psql client required); --fallback-rows
 * covers relations the snapshot does not know.
 *
 *   node dist/src/main.js --catalog catalog.json
 *   node dist/src/main.js --dsn postgresql://localhost/imdb
 */

import process from 'node:process';

import { CatalogSnapshot, catalogFromDsn, catalogFromFile, DEFAULT_FALLBACK_ROWS } from './catalog.js';
import { serve } from './serve.js';

interface Options {
  catalogPath?: string;
  dsn?: string;
  fallbackRows: number;
}

export function parseArgs(argv: string[]): Options {
  const options: Options = { fallbackRows: DEFAULT_FALLBACK_ROWS };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case '--catalog':
        if (!value) throw new Error('--catalog needs a file path');
        options.catalogPath = value;
        i += 1;
        break;
      case '--dsn':
        if (!value) throw new Error('--dsn needs a connection descriptor');
        options.dsn = value;
        i += 1;
        break;
      case '--fallback-rows':
        if (!value || Number.isNaN(Number(value))) throw new Error('--fallback-rows needs a number');
        options.fallbackRows = Number(value);
        i += 1;
        break;
      default:
        throw new Error(`unknown argument: ${flag}`);
    }
  }
  return options;
}

function buildCatalog(options: Options): CatalogSnapshot {
  if (options.catalogPath) return catalogFromFile(options.catalogPath, options.fallbackRows);
  if (options.dsn) return catalogFromDsn(options.dsn, options.fallbackRows);
  // every relation falls back; the adapter still answers correctly-shaped plans
  return new CatalogSnapshot(new Map(), options.fallbackRows);
}

async function main(): Promise<void> {
  let options: Options;
  try {
    options = parseArgs(process.argv.slice(2));
  } catch (error) {
    process.stderr.write(`${(error as Error).message}\n`);
    process.exit(2);
  }
  const catalog = buildCatalog(options);
  process.stderr.write(
    `greedy-leftdeep: catalog of ${catalog.size} relations, fallback ${catalog.fallbackRows} rows\n`,
  );
  await serve(catalog, process.stdin, process.stdout);
}

main().catch((error: unknown) => {
  process.stderr.write(`fatal: ${String(error)}\n`);
  process.exit(1);
});
