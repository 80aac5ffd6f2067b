#ifndef HGNET_H
#define HGNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgnetStatus {
  HGNET_STATUS_OK = 0,
  HGNET_STATUS_NULL_POINTER = 1,
  HGNET_STATUS_INVALID_INPUT = 2,
  HGNET_STATUS_GENERATION = 3,
  HGNET_STATUS_IO = 4,
  HGNET_STATUS_PARSE = 5,
  HGNET_STATUS_USAGE = 6,
  HGNET_STATUS_DIVERGENCE = 7,
  HGNET_STATUS_UTF8 = 8,
  HGNET_STATUS_PANIC = 9,
} HgnetStatus;

/**
 * Opaque undirected graph.
 */
typedef struct HgnetGraph HgnetGraph;

/**
 * Opaque coarsening hierarchy.
 */
typedef struct HgnetHierarchy HgnetHierarchy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hgnet_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hgnet_version(void);

/**
 * Builds a graph from `num_edges` endpoint pairs stored flat in `edges`.
 *
 * # Safety
 * `edges` must point to `2 * num_edges` readable values (or be NULL when
 * `num_edges` is 0); `out` must be writable.
 */
enum HgnetStatus hgnet_graph_from_edges(size_t num_nodes,
                                        const size_t *edges,
                                        size_t num_edges,
                                        struct HgnetGraph **out);

/**
 * 4-neighbor `rows x cols` lattice; node `(r, c)` is `r * cols + c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HgnetStatus hgnet_graph_grid(size_t rows, size_t cols, struct HgnetGraph **out);

/**
 * Reads a whitespace edge list. With `largest_component` nonzero only the
 * largest connected component is kept.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HgnetStatus hgnet_graph_load_edge_list(const char *path,
                                            bool largest_component,
                                            struct HgnetGraph **out);

/**
 * # Safety
 * `g` must be NULL or a handle from this library that is not used again.
 */
void hgnet_graph_free(struct HgnetGraph *g);

/**
 * Node count, 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
size_t hgnet_graph_num_nodes(const struct HgnetGraph *g);

/**
 * Edge count, 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
size_t hgnet_graph_num_edges(const struct HgnetGraph *g);

/**
 * Endpoints `(u <= v)` of edge `e`.
 *
 * # Safety
 * `g` must be a live graph handle; `u` and `v` must be writable.
 */
enum HgnetStatus hgnet_graph_edge(const struct HgnetGraph *g, size_t e, size_t *u, size_t *v);

/**
 * Writes one component label per node into `labels` (numbered by smallest
 * member id) and the component count into `num_components`.
 *
 * # Safety
 * `g` must be a live graph handle; `labels` must hold `num_nodes` values.
 */
enum HgnetStatus hgnet_connected_components(const struct HgnetGraph *g,
                                            size_t *labels,
                                            size_t *num_components);

/**
 * Hop distance between `u` and `v`, or -1 when they are disconnected.
 *
 * # Safety
 * `g` must be a live graph handle; `hops` must be writable.
 */
enum HgnetStatus hgnet_shortest_path_hops(const struct HgnetGraph *g,
                                          size_t u,
                                          size_t v,
                                          int64_t *hops);

/**
 * Louvain communities: one community id per node, the community count and
 * the partition's modularity.
 *
 * # Safety
 * `g` must be a live graph handle; `assignment` must hold `num_nodes`
 * values; the scalar outputs must be writable.
 */
enum HgnetStatus hgnet_louvain(const struct HgnetGraph *g,
                               uint64_t seed,
                               size_t *assignment,
                               size_t *num_communities,
                               double *modularity);

/**
 * Color-connectivity label of a coloring (`colors[u]` nonzero = red):
 * 1 for one red island, 0 for two, -1 otherwise.
 *
 * # Safety
 * `g` must be a live graph handle; `colors` must hold `num_nodes` bytes.
 */
enum HgnetStatus hgnet_verify_label(const struct HgnetGraph *g,
                                    const uint8_t *colors,
                                    int32_t *label);

/**
 * Generates `n_samples` balanced color-connectivity samples over `g` and
 * writes them as JSON Lines to `out_path`.
 *
 * # Safety
 * `g` must be a live graph handle; strings must be NUL-terminated.
 */
enum HgnetStatus hgnet_generate_color_connectivity(const struct HgnetGraph *g,
                                                   size_t n_samples,
                                                   uint64_t seed,
                                                   const char *topology_id,
                                                   const char *out_path);

/**
 * EdgePool hierarchy with uniform edge scores (ties broken by node ids),
 * at most `levels` rounds.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum HgnetStatus hgnet_hierarchy_build_edgepool(const struct HgnetGraph *g,
                                                size_t levels,
                                                struct HgnetHierarchy **out);

/**
 * Louvain hierarchy, at most `levels` rounds.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum HgnetStatus hgnet_hierarchy_build_louvain(const struct HgnetGraph *g,
                                               size_t levels,
                                               uint64_t seed,
                                               struct HgnetHierarchy **out);

/**
 * Coarsening rounds applied, 0 for NULL.
 *
 * # Safety
 * `h` must be NULL or a live hierarchy handle.
 */
size_t hgnet_hierarchy_depth(const struct HgnetHierarchy *h);

/**
 * Node count of `level` (0 = input graph), 0 when out of range or NULL.
 *
 * # Safety
 * `h` must be NULL or a live hierarchy handle.
 */
size_t hgnet_hierarchy_level_size(const struct HgnetHierarchy *h, size_t level);

/**
 * JSON report `{"bounds": ..., "stats": ...}` with exhaustive routing and
 * matched-fraction parameter `m`. Release with [`hgnet_string_free`].
 *
 * # Safety
 * `h` must be a live hierarchy handle; `json` must be writable.
 */
enum HgnetStatus hgnet_hierarchy_report_json(const struct HgnetHierarchy *h, double m, char **json);

/**
 * # Safety
 * `h` must be NULL or a handle from this library that is not used again.
 */
void hgnet_hierarchy_free(struct HgnetHierarchy *h);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string from this library that is not used again.
 */
void hgnet_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HGNET_H */
