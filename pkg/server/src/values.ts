/**
 * Typed-value JSON encoding shared with the interpreter client.
 *
 * Every runtime value crosses the wire as an object with a "type" tag:
 *   {"type": "Text", "value": "..."}
 *   {"type": "Interval", "start": 1.0, "end": 2.0}
 *   {"type": "Video", "source": "...", "duration": 10, "spans": [[0, 10]], "effects": []}
 *   {"type": "Region", "x": 0.1, "y": 0.2, "w": 0.5, "h": 0.5}
 *   {"type": "PoseSequence", "frames": [{"t": 0.5, "keypoints": [["nose", 0.5, 0.2], ...]}]}
 *   {"type": "Number", "value": 3.5}
 *   {"type": "Bool", "value": true}
 */

export interface VideoValue {
  type: "Video";
  source: string;
  duration: number;
  spans: [number, number][];
  effects: [string, string][];
}

export interface IntervalValue {
  type: "Interval";
  start: number;
  end: number;
}

export interface RegionValue {
  type: "Region";
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PoseFrame {
  t: number;
  keypoints: [string, number, number][];
}

export interface PoseSequenceValue {
  type: "PoseSequence";
  frames: PoseFrame[];
}

export interface TextValue {
  type: "Text";
  value: string;
}

export interface NumberValue {
  type: "Number";
  value: number;
}

export interface BoolValue {
  type: "Bool";
  value: boolean;
}

export type TypedValue =
  | VideoValue
  | IntervalValue
  | RegionValue
  | PoseSequenceValue
  | TextValue
  | NumberValue
  | BoolValue;

export const VALUE_TYPE_NAMES = [
  "Video",
  "Interval",
  "Region",
  "PoseSequence",
  "Text",
  "Number",
  "Bool",
] as const;

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isPair(x: unknown): x is [number, number] {
  return Array.isArray(x) && x.length === 2 && isFiniteNumber(x[0]) && isFiniteNumber(x[1]);
}

export function isTypedValue(data: unknown): data is TypedValue {
  if (typeof data !== "object" || data === null) return false;
  const record = data as Record<string, unknown>;
  switch (record.type) {
    case "Video":
      return (
        typeof record.source === "string" &&
        isFiniteNumber(record.duration) &&
        Array.isArray(record.spans) &&
        record.spans.every(isPair) &&
        Array.isArray(record.effects) &&
        record.effects.every(
          (e) => Array.isArray(e) && e.length === 2 && e.every((part) => typeof part === "string"),
        )
      );
    case "Interval":
      return isFiniteNumber(record.start) && isFiniteNumber(record.end);
    case "Region":
      return (["x", "y", "w", "h"] as const).every((k) => isFiniteNumber(record[k]));
    case "PoseSequence":
      return (
        Array.isArray(record.frames) &&
        record.frames.every(
          (f) =>
            typeof f === "object" &&
            f !== null &&
            isFiniteNumber((f as PoseFrame).t) &&
            Array.isArray((f as PoseFrame).keypoints) &&
            (f as PoseFrame).keypoints.every(
              (k) =>
                Array.isArray(k) &&
                k.length === 3 &&
                typeof k[0] === "string" &&
                isFiniteNumber(k[1]) &&
                isFiniteNumber(k[2]),
            ),
        )
      );
    case "Text":
      return typeof record.value === "string";
    case "Number":
      return isFiniteNumber(record.value);
    case "Bool":
      return typeof record.value === "boolean";
    default:
      return false;
  }
}

/** Semantic type name a typed value carries, e.g. "Text". */
export function valueTypeName(value: TypedValue): string {
  return value.type;
}
