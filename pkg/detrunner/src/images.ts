import fs from 'fs';
import path from 'path';
import { PNG } from 'pngjs';

import { GrayImage } from './types';

/** PNG files of a frame directory, sorted by filename; frame ids follow this order. */
export function listFrameFiles(framesDir: string): string[] {
  if (!fs.existsSync(framesDir) || !fs.statSync(framesDir).isDirectory()) {
    throw new Error(`${framesDir} is not a directory`);
  }
  const files = fs
    .readdirSync(framesDir)
    .filter((name) => name.toLowerCase().endsWith('.png'))
    .sort()
    .map((name) => path.join(framesDir, name));
  if (files.length === 0) {
    throw new Error(`${framesDir} contains no .png frames`);
  }
  return files;
}

export function loadLuma(file: string): GrayImage {
  let png: PNG;
  try {
    png = PNG.sync.read(fs.readFileSync(file));
  } catch (err) {
    throw new Error(`cannot read frame ${file}: ${(err as Error).message}`);
  }
  const { width, height, data } = png;
  const luma = new Float64Array(width * height);
  for (let i = 0; i < width * height; i += 1) {
    const o = i * 4;
    luma[i] = 0.299 * data[o] + 0.587 * data[o + 1] + 0.114 * data[o + 2];
  }
  return { width, height, luma };
}
