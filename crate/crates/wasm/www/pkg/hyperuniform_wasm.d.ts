/* tslint:disable */
/* eslint-disable */

/**
 * Cells of the `n`-cell equal-area partition, flattened.
 */
export function partition_cells(n: number): Float64Array;

/**
 * Number of points a process of this size produces.
 */
export function point_count(process: string, size: number): number;

/**
 * One sample on S², flattened.
 */
export function sample_points(process: string, size: number, seed: bigint, replicate: bigint): Float64Array;

/**
 * Formula number variance at `steps` cap angles evenly spaced in `(0, pi)`.
 */
export function variance_curve(process: string, size: number, steps: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly partition_cells: (a: number) => [number, number, number, number];
    readonly point_count: (a: number, b: number, c: number) => [number, number, number];
    readonly sample_points: (a: number, b: number, c: number, d: bigint, e: bigint) => [number, number, number, number];
    readonly variance_curve: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
