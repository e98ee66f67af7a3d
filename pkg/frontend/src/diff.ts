import { LayoutJson } from "./types.js";

function key(description: string, box: readonly number[]): string {
  return `${description}|${box.join(",")}`;
}

/**
 * Indices of objects in `next` that have no counterpart in `prev`,
 * matching by description plus exact box and pairing duplicates
 * one-for-one (two identical pandas in both layouts cancel out).
 */
export function addedBoxIndices(prev: LayoutJson | null, next: LayoutJson): number[] {
  const remaining = new Map<string, number>();
  for (const obj of prev?.objects ?? []) {
    const k = key(obj.description, obj.box);
    remaining.set(k, (remaining.get(k) ?? 0) + 1);
  }
  const added: number[] = [];
  next.objects.forEach((obj, i) => {
    const k = key(obj.description, obj.box);
    const count = remaining.get(k) ?? 0;
    if (count > 0) {
      remaining.set(k, count - 1);
    } else {
      added.push(i);
    }
  });
  return added;
}
