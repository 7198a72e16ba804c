import { runDetector } from './detector';
import { listFrameFiles, loadLuma } from './images';
import { validateDetectionsFile, writeDetections } from './output';
import { DEFAULT_SPEC, DetectionsDocument, DetectorSpec } from './types';

const USAGE = `usage:
  detrunner detect --frames <dir> --out <file.json> [--model blob] [--threshold 0.25] [--device cpu]
  detrunner validate --file <file.json>`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith('--') || value === undefined) {
      throw new Error(`malformed flag pair near '${key}'`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

export function detectFrames(framesDir: string, outPath: string, spec: DetectorSpec): DetectionsDocument {
  const files = listFrameFiles(framesDir);
  const doc: DetectionsDocument = { frames: [] };
  files.forEach((file, frameId) => {
    const image = loadLuma(file);
    doc.frames.push({ frame_id: frameId, objects: runDetector(image, spec) });
  });
  writeDetections(doc, outPath);
  return doc;
}

function cmdDetect(flags: Map<string, string>): number {
  const framesDir = flags.get('frames');
  const outPath = flags.get('out');
  if (!framesDir || !outPath) {
    console.error('error: detect requires --frames and --out');
    return 2;
  }
  const spec: DetectorSpec = {
    model: flags.get('model') ?? DEFAULT_SPEC.model,
    threshold: flags.has('threshold') ? Number(flags.get('threshold')) : DEFAULT_SPEC.threshold,
    device: flags.get('device') ?? DEFAULT_SPEC.device,
  };
  if (!Number.isFinite(spec.threshold)) {
    console.error(`error: --threshold must be a number, got '${flags.get('threshold')}'`);
    return 2;
  }
  const doc = detectFrames(framesDir, outPath, spec);
  const total = doc.frames.reduce((acc, f) => acc + f.objects.length, 0);
  console.log(JSON.stringify({ out: outPath, frames: doc.frames.length, detections: total }));
  return 0;
}

function cmdValidate(flags: Map<string, string>): number {
  const file = flags.get('file');
  if (!file) {
    console.error('error: validate requires --file');
    return 2;
  }
  const problems = validateDetectionsFile(file);
  if (problems.length > 0) {
    for (const problem of problems) console.error(`violation: ${problem}`);
    return 1;
  }
  console.log(JSON.stringify({ file, ok: true }));
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  let flags: Map<string, string>;
  try {
    flags = parseFlags(rest);
  } catch (err) {
    console.error(`error: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  try {
    if (command === 'detect') return cmdDetect(flags);
    if (command === 'validate') return cmdValidate(flags);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  console.error(`error: unknown command '${command ?? ''}'\n${USAGE}`);
  return 2;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
