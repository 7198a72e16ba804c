import { DetectedObject, DetectorSpec, GrayImage } from './types';

/**
 * Reference detector: connected regions whose luma deviates strongly from
 * the frame mean. Deterministic and self-contained, so the full toolchain
 * runs without downloadable network weights. Regions are classified by how
 * completely they fill their bounding box (boxy vs round).
 */
export function detectBlobs(image: GrayImage, spec: DetectorSpec): DetectedObject[] {
  const { width, height, luma } = image;
  const n = width * height;
  let sum = 0;
  for (let i = 0; i < n; i += 1) sum += luma[i];
  const mean = sum / n;
  let varSum = 0;
  for (let i = 0; i < n; i += 1) {
    const d = luma[i] - mean;
    varSum += d * d;
  }
  const std = Math.sqrt(varSum / n);
  const lumaThreshold = Math.max(12, 1.2 * std);
  const minArea = Math.max(16, 0.001 * n);

  const labels = new Int32Array(n); // 0 = unvisited, -1 = below threshold
  for (let i = 0; i < n; i += 1) {
    if (Math.abs(luma[i] - mean) <= lumaThreshold) labels[i] = -1;
  }

  const objects: DetectedObject[] = [];
  const stack = new Int32Array(n);
  let nextLabel = 1;
  for (let seed = 0; seed < n; seed += 1) {
    if (labels[seed] !== 0) continue;
    let top = 0;
    stack[top++] = seed;
    labels[seed] = nextLabel;
    let area = 0;
    let devSum = 0;
    let minX = width;
    let maxX = -1;
    let minY = height;
    let maxY = -1;
    while (top > 0) {
      const at = stack[--top];
      const x = at % width;
      const y = (at - x) / width;
      area += 1;
      devSum += Math.abs(luma[at] - mean);
      if (x < minX) minX = x;
      if (x > maxX) maxX = x;
      if (y < minY) minY = y;
      if (y > maxY) maxY = y;
      if (x > 0 && labels[at - 1] === 0) {
        labels[at - 1] = nextLabel;
        stack[top++] = at - 1;
      }
      if (x < width - 1 && labels[at + 1] === 0) {
        labels[at + 1] = nextLabel;
        stack[top++] = at + 1;
      }
      if (y > 0 && labels[at - width] === 0) {
        labels[at - width] = nextLabel;
        stack[top++] = at - width;
      }
      if (y < height - 1 && labels[at + width] === 0) {
        labels[at + width] = nextLabel;
        stack[top++] = at + width;
      }
    }
    nextLabel += 1;
    if (area < minArea) continue;
    const boxW = maxX - minX + 1;
    const boxH = maxY - minY + 1;
    const meanDev = devSum / area;
    // strictly below 1, and above 1/3 for anything that cleared the luma threshold
    const score = meanDev / (meanDev + 2 * lumaThreshold);
    const fill = area / (boxW * boxH);
    const classId = fill > 0.9 ? 0 : 1;
    // clamp to frame bounds
    const x0 = Math.max(0, Math.min(minX, width - 1));
    const y0 = Math.max(0, Math.min(minY, height - 1));
    const w = Math.min(boxW, width - x0);
    const h = Math.min(boxH, height - y0);
    objects.push({ class_id: classId, bbox: [x0, y0, w, h], score });
  }
  const kept = objects.filter((o) => o.score >= spec.threshold);
  kept.sort((a, b) => b.score - a.score || a.bbox[0] - b.bbox[0] || a.bbox[1] - b.bbox[1]);
  return kept;
}

export function runDetector(image: GrayImage, spec: DetectorSpec): DetectedObject[] {
  if (spec.model !== 'blob') {
    throw new Error(
      `model '${spec.model}': missing model weights (no downloadable weights in this ` +
        `environment; the built-in model identifier is 'blob')`,
    );
  }
  if (spec.threshold < 0 || spec.threshold > 1) {
    throw new Error(`threshold must be in [0, 1], got ${spec.threshold}`);
  }
  return detectBlobs(image, spec);
}
