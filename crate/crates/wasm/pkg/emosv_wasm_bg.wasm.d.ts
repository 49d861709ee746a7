/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_copypasteview_free: (a: number, b: number) => void;
export const __wbg_eerview_free: (a: number, b: number) => void;
export const __wbg_get_copypasteview_a: (a: number) => [number, number];
export const __wbg_get_copypasteview_a_first: (a: number) => number;
export const __wbg_get_copypasteview_a_start: (a: number) => number;
export const __wbg_get_copypasteview_b: (a: number) => [number, number];
export const __wbg_get_copypasteview_b_start: (a: number) => number;
export const __wbg_get_copypasteview_emotions: (a: number) => [number, number];
export const __wbg_get_copypasteview_kind: (a: number) => [number, number];
export const __wbg_get_copypasteview_out: (a: number) => [number, number];
export const __wbg_get_eerview_eer: (a: number) => number;
export const __wbg_get_eerview_far: (a: number) => [number, number];
export const __wbg_get_eerview_frr: (a: number) => [number, number];
export const __wbg_get_eerview_threshold: (a: number) => number;
export const __wbg_get_eerview_thresholds: (a: number) => [number, number];
export const __wbg_get_maskview_centers: (a: number) => [number, number];
export const __wbg_get_maskview_dominant: (a: number) => [number, number];
export const __wbg_get_maskview_energy: (a: number) => [number, number];
export const __wbg_get_maskview_masked: (a: number) => [number, number];
export const __wbg_get_maskview_zones: (a: number) => [number, number];
export const __wbg_maskview_free: (a: number, b: number) => void;
export const __wbg_set_copypasteview_a: (a: number, b: number, c: number) => void;
export const __wbg_set_copypasteview_a_first: (a: number, b: number) => void;
export const __wbg_set_copypasteview_a_start: (a: number, b: number) => void;
export const __wbg_set_copypasteview_b: (a: number, b: number, c: number) => void;
export const __wbg_set_copypasteview_b_start: (a: number, b: number) => void;
export const __wbg_set_copypasteview_emotions: (a: number, b: number, c: number) => void;
export const __wbg_set_copypasteview_kind: (a: number, b: number, c: number) => void;
export const __wbg_set_copypasteview_out: (a: number, b: number, c: number) => void;
export const __wbg_set_eerview_eer: (a: number, b: number) => void;
export const __wbg_set_eerview_far: (a: number, b: number, c: number) => void;
export const __wbg_set_eerview_frr: (a: number, b: number, c: number) => void;
export const __wbg_set_eerview_threshold: (a: number, b: number) => void;
export const __wbg_set_eerview_thresholds: (a: number, b: number, c: number) => void;
export const __wbg_set_maskview_centers: (a: number, b: number, c: number) => void;
export const __wbg_set_maskview_dominant: (a: number, b: number, c: number) => void;
export const __wbg_set_maskview_energy: (a: number, b: number, c: number) => void;
export const __wbg_set_maskview_masked: (a: number, b: number, c: number) => void;
export const __wbg_set_maskview_zones: (a: number, b: number, c: number) => void;
export const copy_paste_preview: (a: number, b: number, c: number, d: number, e: bigint, f: bigint, g: number) => [number, number, number];
export const eer_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const mask_view: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const sample_scores: (a: number, b: number, c: number, d: bigint) => [number, number];
export const synth_clip: (a: number, b: number, c: bigint, d: bigint, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
