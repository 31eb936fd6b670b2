/**
 * Deterministic stub models behind the /invoke endpoint.
 *
 * Every stub is a pure function of its arguments, so conformance tests can
 * assert exact responses.  A real deployment would swap these handlers for
 * adapters around actual vision models (a keypoint detector behind POSE, a
 * video question-answering model behind VQA) without touching the protocol
 * layer; see the handler signature below.
 */

import { createHash } from "node:crypto";

import type { IntervalValue, PoseSequenceValue, TextValue, TypedValue } from "./values.js";

export interface ManifestParam {
  name: string;
  type: string;
  required: boolean;
}

export interface ManifestFunction {
  name: string;
  params: ManifestParam[];
  returns: string;
  usage: string;
}

/** Application-level failure; becomes {ok:false, error:{kind, message}}. */
export class StubError extends Error {
  constructor(
    public kind: "UnknownFunction" | "BadArgs" | "Internal",
    message: string,
  ) {
    super(message);
  }
}

export type Handler = (args: Record<string, TypedValue>) => TypedValue;

// Usage strings mirror the client's built-in catalog verbatim: signatures
// must compare equal when the served manifest is merged into the registry.
export const MANIFEST: ManifestFunction[] = [
  {
    name: "GROUNDING",
    params: [
      { name: "video", type: "Video", required: true },
      { name: "query", type: "Text", required: true },
    ],
    returns: "Interval",
    usage: "locate the time interval where the queried event happens",
  },
  {
    name: "POSE",
    params: [{ name: "video", type: "Video", required: true }],
    returns: "PoseSequence",
    usage: "detect human body keypoints over time",
  },
  {
    name: "VQA",
    params: [
      { name: "video", type: "Video", required: true },
      { name: "question", type: "Text", required: true },
    ],
    returns: "Text",
    usage: "answer a natural-language question about the video",
  },
];

const CANNED_ANSWERS = [
  "a person walks across the room",
  "someone picks up an object",
  "the door opens",
  "two people are talking",
  "nothing notable happens",
  "the camera pans to the window",
  "a dog runs through the frame",
  "someone sits down",
];

function requireText(args: Record<string, TypedValue>, name: string): string {
  const value = args[name];
  if (value === undefined || value.type !== "Text") {
    throw new StubError("BadArgs", `argument '${name}' must be a Text value`);
  }
  return value.value;
}

function requireVideo(args: Record<string, TypedValue>, name: string): string {
  const value = args[name];
  if (value === undefined || value.type !== "Video") {
    throw new StubError("BadArgs", `argument '${name}' must be a Video value`);
  }
  return value.source;
}

/** Canned answer chosen by a stable hash of (video source, question). */
export function vqaStub(args: Record<string, TypedValue>): TextValue {
  const source = requireVideo(args, "video");
  const question = requireText(args, "question");
  const digest = createHash("sha256").update(`${source}|${question}`).digest();
  const answer = CANNED_ANSWERS[digest[0] % CANNED_ANSWERS.length];
  return { type: "Text", value: answer };
}

/** Interval(1.0, 2.0) for any query mentioning "enter"; error otherwise. */
export function groundingStub(args: Record<string, TypedValue>): IntervalValue {
  requireVideo(args, "video");
  const query = requireText(args, "query");
  if (!query.toLowerCase().includes("enter")) {
    throw new StubError("Internal", `grounding stub has no interval for query '${query}'`);
  }
  return { type: "Interval", start: 1.0, end: 2.0 };
}

const FIXED_KEYPOINTS: [string, number, number][] = [
  ["nose", 0.5, 0.2],
  ["left_shoulder", 0.42, 0.35],
  ["right_shoulder", 0.58, 0.35],
  ["left_hip", 0.45, 0.55],
  ["right_hip", 0.55, 0.55],
  ["left_knee", 0.45, 0.72],
  ["right_knee", 0.55, 0.72],
  ["left_ankle", 0.45, 0.9],
  ["right_ankle", 0.55, 0.9],
];

/** Fixed two-frame pose sequence regardless of input video. */
export function poseStub(args: Record<string, TypedValue>): PoseSequenceValue {
  requireVideo(args, "video");
  return {
    type: "PoseSequence",
    frames: [
      { t: 0.5, keypoints: FIXED_KEYPOINTS },
      { t: 1.0, keypoints: FIXED_KEYPOINTS },
    ],
  };
}

export const HANDLERS: Record<string, Handler> = {
  VQA: vqaStub,
  GROUNDING: groundingStub,
  POSE: poseStub,
};
