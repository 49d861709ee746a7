/* tslint:disable */
/* eslint-disable */

/**
 * Two source clips of one speaker and their CopyPaste result.
 */
export class CopyPasteView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    a_first: boolean;
    a_start: number;
    a: Float32Array;
    b_start: number;
    b: Float32Array;
    /**
     * Emotion tags of the result, comma separated.
     */
    emotions: string;
    /**
     * "S-CP" or "D-CP".
     */
    kind: string;
    out: Float32Array;
}

/**
 * FAR and FRR at every distinct score plus the interpolated EER.
 */
export class EerView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    eer: number;
    far: Float64Array;
    frr: Float64Array;
    threshold: number;
    thresholds: Float64Array;
}

/**
 * Per-frame energy zones and the frames a mask plan would blank.
 */
export class MaskView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    centers: Uint32Array;
    /**
     * "intense", "subdued" or "none".
     */
    dominant: string;
    /**
     * Normalized RMS energy per frame.
     */
    energy: Float64Array;
    masked: Uint32Array;
    /**
     * Zone per frame: 0 noise, 1 low, 2 high.
     */
    zones: Uint8Array;
}

/**
 * CopyPaste of two clips by the same synthetic speaker. Equal emotions give
 * S-CP, different ones D-CP.
 */
export function copy_paste_preview(emotion_a: string, emotion_b: string, speaker_seed: bigint, seed: bigint, sample_rate: number): CopyPasteView;

/**
 * `targets[i]` is nonzero for target trials.
 */
export function eer_curve(scores: Float64Array, targets: Uint8Array): EerView;

/**
 * Emotion-aware (`random = false`) or random masking of 25 ms / 10 ms frames.
 */
export function mask_view(samples: Float32Array, sample_rate: number, count: number, span: number, random: boolean, seed: bigint): MaskView;

/**
 * Gaussian-like synthetic scores: targets centered at `separation`,
 * nontargets at 0, unit spread. Returns scores then labels (1/0) as one
 * array of length `2 * (n_target + n_nontarget)`.
 */
export function sample_scores(n_target: number, n_nontarget: number, separation: number, seed: bigint): Float64Array;

/**
 * Renders a synthetic utterance (`emotion`: angry, positive, neutral or sad).
 */
export function synth_clip(emotion: string, speaker_seed: bigint, clip_seed: bigint, secs: number, sample_rate: number): Float32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_copypasteview_free: (a: number, b: number) => void;
    readonly __wbg_eerview_free: (a: number, b: number) => void;
    readonly __wbg_get_copypasteview_a: (a: number) => [number, number];
    readonly __wbg_get_copypasteview_a_first: (a: number) => number;
    readonly __wbg_get_copypasteview_a_start: (a: number) => number;
    readonly __wbg_get_copypasteview_b: (a: number) => [number, number];
    readonly __wbg_get_copypasteview_b_start: (a: number) => number;
    readonly __wbg_get_copypasteview_emotions: (a: number) => [number, number];
    readonly __wbg_get_copypasteview_kind: (a: number) => [number, number];
    readonly __wbg_get_copypasteview_out: (a: number) => [number, number];
    readonly __wbg_get_eerview_eer: (a: number) => number;
    readonly __wbg_get_eerview_far: (a: number) => [number, number];
    readonly __wbg_get_eerview_frr: (a: number) => [number, number];
    readonly __wbg_get_eerview_threshold: (a: number) => number;
    readonly __wbg_get_eerview_thresholds: (a: number) => [number, number];
    readonly __wbg_get_maskview_centers: (a: number) => [number, number];
    readonly __wbg_get_maskview_dominant: (a: number) => [number, number];
    readonly __wbg_get_maskview_energy: (a: number) => [number, number];
    readonly __wbg_get_maskview_masked: (a: number) => [number, number];
    readonly __wbg_get_maskview_zones: (a: number) => [number, number];
    readonly __wbg_maskview_free: (a: number, b: number) => void;
    readonly __wbg_set_copypasteview_a: (a: number, b: number, c: number) => void;
    readonly __wbg_set_copypasteview_a_first: (a: number, b: number) => void;
    readonly __wbg_set_copypasteview_a_start: (a: number, b: number) => void;
    readonly __wbg_set_copypasteview_b: (a: number, b: number, c: number) => void;
    readonly __wbg_set_copypasteview_b_start: (a: number, b: number) => void;
    readonly __wbg_set_copypasteview_emotions: (a: number, b: number, c: number) => void;
    readonly __wbg_set_copypasteview_kind: (a: number, b: number, c: number) => void;
    readonly __wbg_set_copypasteview_out: (a: number, b: number, c: number) => void;
    readonly __wbg_set_eerview_eer: (a: number, b: number) => void;
    readonly __wbg_set_eerview_far: (a: number, b: number, c: number) => void;
    readonly __wbg_set_eerview_frr: (a: number, b: number, c: number) => void;
    readonly __wbg_set_eerview_threshold: (a: number, b: number) => void;
    readonly __wbg_set_eerview_thresholds: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskview_centers: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskview_dominant: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskview_energy: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskview_masked: (a: number, b: number, c: number) => void;
    readonly __wbg_set_maskview_zones: (a: number, b: number, c: number) => void;
    readonly copy_paste_preview: (a: number, b: number, c: number, d: number, e: bigint, f: bigint, g: number) => [number, number, number];
    readonly eer_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly mask_view: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly sample_scores: (a: number, b: number, c: number, d: bigint) => [number, number];
    readonly synth_clip: (a: number, b: number, c: bigint, d: bigint, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
