import fs from 'fs';

import { DetectionsDocument } from './types';

export function writeDetections(doc: DetectionsDocument, outPath: string): void {
  fs.writeFileSync(outPath, `${JSON.stringify(doc, null, 2)}\n`);
}

/** Re-check an emitted file against the detections contract; returns violations. */
export function validateDetectionsFile(path: string): string[] {
  const problems: string[] = [];
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(path, 'utf8'));
  } catch (err) {
    return [`${path}: not valid JSON: ${(err as Error).message}`];
  }
  if (typeof doc !== 'object' || doc === null || Array.isArray(doc)) {
    return [`${path}: top level must be an object`];
  }
  const frames = (doc as Record<string, unknown>).frames;
  if (!Array.isArray(frames)) {
    return [`${path}: missing 'frames' list`];
  }
  frames.forEach((frame, fi) => {
    const where = `frames[${fi}]`;
    if (typeof frame !== 'object' || frame === null) {
      problems.push(`${where}: must be an object`);
      return;
    }
    const f = frame as Record<string, unknown>;
    if (!Number.isInteger(f.frame_id)) {
      problems.push(`${where}: frame_id must be an integer`);
    }
    if (!Array.isArray(f.objects)) {
      problems.push(`${where}: missing 'objects' list`);
      return;
    }
    f.objects.forEach((obj, oi) => {
      const ref = `${where}.objects[${oi}]`;
      if (typeof obj !== 'object' || obj === null) {
        problems.push(`${ref}: must be an object`);
        return;
      }
      const o = obj as Record<string, unknown>;
      if (!Number.isInteger(o.class_id)) {
        problems.push(`${ref}: class_id must be an integer`);
      }
      const bbox = o.bbox;
      if (!Array.isArray(bbox) || bbox.length !== 4 || bbox.some((v) => typeof v !== 'number')) {
        problems.push(`${ref}: bbox must be four numbers`);
      } else if (bbox[2] <= 0 || bbox[3] <= 0) {
        problems.push(`${ref}: bbox extents must be positive, got ${bbox[2]}x${bbox[3]}`);
      }
      if (typeof o.score !== 'number') {
        problems.push(`${ref}: missing numeric score`);
      } else if (o.score < 0 || o.score > 1) {
        problems.push(`${ref}: score must be in [0, 1], got ${o.score}`);
      }
    });
  });
  return problems;
}
