import type { DecisionRecord } from "./types.js";

export const STORAGE_KEY = "categoriza.decisions";

export function makeDecision(
  description: string,
  suggested: string[],
  chosen: string,
  timestamp: string = new Date().toISOString(),
): DecisionRecord {
  return {
    description,
    suggested: [...suggested],
    chosen,
    accepted: suggested.includes(chosen),
    timestamp,
  };
}

// One JSON object per line, trailing newline, no blank lines in between.
export function toJsonl(records: readonly DecisionRecord[]): string {
  return records.map((record) => JSON.stringify(record) + "\n").join("");
}

export function fromJsonl(text: string): DecisionRecord[] {
  const records: DecisionRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line || !line.trim()) {
      continue;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new Error(`line ${i + 1}: not valid JSON`);
    }
    records.push(asRecord(parsed, i + 1));
  }
  return records;
}

function asRecord(value: unknown, line: number): DecisionRecord {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new Error(`line ${line}: not an object`);
  }
  const raw = value as Record<string, unknown>;
  const { description, suggested, chosen, accepted, timestamp } = raw;
  if (
    typeof description !== "string" ||
    typeof chosen !== "string" ||
    typeof accepted !== "boolean" ||
    typeof timestamp !== "string" ||
    !Array.isArray(suggested) ||
    !suggested.every((code) => typeof code === "string")
  ) {
    throw new Error(`line ${line}: does not match the decision record schema`);
  }
  const codes = suggested as string[];
  if (accepted !== codes.includes(chosen)) {
    throw new Error(`line ${line}: accepted flag contradicts the suggestion list`);
  }
  return { description, suggested: [...codes], chosen, accepted, timestamp };
}

// Append-only log persisted in browser storage as the same JSONL the
// export produces, so what you download is exactly what was stored.
export class DecisionLog {
  private records: DecisionRecord[];

  constructor(private readonly storage: Storage = window.localStorage) {
    this.records = this.restore();
  }

  all(): readonly DecisionRecord[] {
    return this.records;
  }

  append(record: DecisionRecord): void {
    this.records.push(record);
    this.storage.setItem(STORAGE_KEY, toJsonl(this.records));
  }

  exportJsonl(): string {
    return toJsonl(this.records);
  }

  private restore(): DecisionRecord[] {
    // a corrupt stored log must not brick the page
    try {
      return fromJsonl(this.storage.getItem(STORAGE_KEY) ?? "");
    } catch {
      return [];
    }
  }
}
