/* tslint:disable */
/* eslint-disable */

/**
 * Plans on a single Cliff Walk dataset and reports the planned policy next
 * to the true optimal one.
 *
 * Returns `{"rows", "cols", "start", "goal", "cliff": [..], "optimal": [..],
 * "planned": [..], "visits": [..], "loss"}`; actions are 0 left, 1 right,
 * 2 up, 3 down.
 */
export function cliff_policies(method: string, strength: number, n_trajectories: number, trajectory_length: number, p_optimal: number, seed: number): string;

/**
 * Draws a random MDP and compares the optimal policy under the discount
 * `(1 - eps) gamma` with the one under the uniform-blended transitions.
 *
 * Returns `{"lowered_discount": [..], "uniform_blend": [..], "excluded": [..], "agree"}`.
 */
export function equivalence_check(n_states: number, n_actions: number, eps: number, seed: number): string;

/**
 * Mean loss against regularization strength for one environment and method,
 * from uniform start states.
 *
 * Returns `{"strengths": [..], "mean_loss": [..], "stderr_loss": [..], "mean_mse": [..]}`.
 */
export function loss_curve(env: string, method: string, n_trajectories: number, trajectory_length: number, p_optimal: number, replications: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cliff_policies: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly equivalence_check: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly loss_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
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
