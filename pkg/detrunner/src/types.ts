export interface DetectorSpec {
  /** Model identifier; "blob" is the built-in reference detector. */
  model: string;
  /** Confidence threshold applied at the source (inclusive). */
  threshold: number;
  /** Device hint; the built-in detector always runs on the CPU. */
  device: string;
}

export const DEFAULT_SPEC: DetectorSpec = {
  model: 'blob',
  threshold: 0.25,
  device: 'cpu',
};

export interface DetectedObject {
  class_id: number;
  /** [x, y, w, h] in pixel units of the input frames. */
  bbox: [number, number, number, number];
  score: number;
}

export interface FrameDetections {
  frame_id: number;
  objects: DetectedObject[];
}

/** The frozen detections JSON contract shared with the evaluation toolkit. */
export interface DetectionsDocument {
  frames: FrameDetections[];
}

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major luma samples. */
  luma: Float64Array;
}
