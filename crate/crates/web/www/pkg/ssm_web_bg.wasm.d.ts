/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curveset_free: (a: number, b: number) => void;
export const __wbg_sweepset_free: (a: number, b: number) => void;
export const curveset_closed: (a: number) => [number, number];
export const curveset_flow: (a: number) => [number, number];
export const curveset_t: (a: number) => [number, number];
export const frequencyResponse: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const latentSweep: (a: number, b: number, c: number, d: number) => [number, number, number];
export const learningCurve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sweepset_closed: (a: number) => [number, number];
export const sweepset_flow: (a: number) => [number, number];
export const sweepset_nValues: (a: number) => [number, number];
export const sweepset_t: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
