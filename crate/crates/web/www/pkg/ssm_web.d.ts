/* tslint:disable */
/* eslint-disable */

export class CurveSet {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly closed: Float64Array;
    readonly flow: Float64Array;
    readonly t: Float64Array;
}

export class SweepSet {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly closed: Float64Array;
    readonly flow: Float64Array;
    readonly nValues: Uint32Array;
    readonly t: Float64Array;
}

export function frequencyResponse(a: Float64Array, b: Float64Array, c: Float64Array, len: number): Float64Array;

export function latentSweep(a: number, init: number, n_max: number, tau: number): SweepSet;

export function learningCurve(a: number, init: number, gain: number, tau: number): CurveSet;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curveset_free: (a: number, b: number) => void;
    readonly __wbg_sweepset_free: (a: number, b: number) => void;
    readonly curveset_closed: (a: number) => [number, number];
    readonly curveset_flow: (a: number) => [number, number];
    readonly curveset_t: (a: number) => [number, number];
    readonly frequencyResponse: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly latentSweep: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly learningCurve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sweepset_closed: (a: number) => [number, number];
    readonly sweepset_flow: (a: number) => [number, number];
    readonly sweepset_nValues: (a: number) => [number, number];
    readonly sweepset_t: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
