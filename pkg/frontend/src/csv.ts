// Minimal CSV header inspection for the role-assignment dropdowns.
// Parsing of the data itself happens server-side.

export function headerColumns(csvText: string): string[] {
  const firstLine = csvText.split(/\r?\n/, 1)[0] ?? "";
  return firstLine
    .split(",")
    .map((c) => c.trim().replace(/^"|"$/g, ""))
    .filter((c) => c.length > 0);
}

export function rowCount(csvText: string): number {
  return csvText.split(/\r?\n/).filter((line) => line.trim().length > 0).length - 1;
}
