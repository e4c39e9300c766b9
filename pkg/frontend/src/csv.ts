/**
 * Parser for the benchmark result CSV.
 *
 * Expected schema (header row, comma-separated, '.' decimals, LF endings):
 *   trial,c,rho,pair,method,N,K,distance,wall_time_ms
 */

export interface BenchRow {
  trial: number;
  c: number;
  rho: number;
  pair: string;
  method: string;
  N: number;
  K: number;
  distance: number;
  wall_time_ms: number;
}

export const EXPECTED_COLUMNS = [
  "trial",
  "c",
  "rho",
  "pair",
  "method",
  "N",
  "K",
  "distance",
  "wall_time_ms",
] as const;

/** Thrown when the CSV does not match the benchmark schema; names the column. */
export class SchemaMismatch extends Error {
  constructor(
    message: string,
    readonly column: string,
  ) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

function parseNumber(raw: string, column: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaMismatch(
      `line ${line}: cannot parse ${column}=${JSON.stringify(raw)} as a number`,
      column,
    );
  }
  return value;
}

export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch("empty CSV", "trial");
  }
  const header = lines[0].split(",");
  for (let i = 0; i < EXPECTED_COLUMNS.length; i++) {
    if (header[i] !== EXPECTED_COLUMNS[i]) {
      throw new SchemaMismatch(
        `header column ${i} is ${JSON.stringify(header[i] ?? "")}, expected "${EXPECTED_COLUMNS[i]}"`,
        EXPECTED_COLUMNS[i],
      );
    }
  }
  if (header.length !== EXPECTED_COLUMNS.length) {
    throw new SchemaMismatch(
      `header has ${header.length} columns, expected ${EXPECTED_COLUMNS.length}`,
      header[EXPECTED_COLUMNS.length],
    );
  }
  const rows: BenchRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== EXPECTED_COLUMNS.length) {
      throw new SchemaMismatch(
        `line ${i + 1} has ${parts.length} fields, expected ${EXPECTED_COLUMNS.length}`,
        EXPECTED_COLUMNS[Math.min(parts.length, EXPECTED_COLUMNS.length - 1)],
      );
    }
    rows.push({
      trial: parseNumber(parts[0], "trial", i + 1),
      c: parseNumber(parts[1], "c", i + 1),
      rho: parseNumber(parts[2], "rho", i + 1),
      pair: parts[3],
      method: parts[4],
      N: parseNumber(parts[5], "N", i + 1),
      K: parseNumber(parts[6], "K", i + 1),
      distance: parseNumber(parts[7], "distance", i + 1),
      wall_time_ms: parseNumber(parts[8], "wall_time_ms", i + 1),
    });
  }
  return rows;
}
