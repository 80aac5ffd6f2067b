//! C ABI over the `hgnet` graph, coarsening and dataset routines.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! constructors and released with the matching `*_free`. Every fallible
//! call returns an [`HgnetStatus`]; on failure a message is available from
//! [`hgnet_last_error_message`] on the same thread until the next failing
//! call. Panics are caught and reported as `HGNET_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use hgnet::coarsen::{louvain_with, EdgeScoreParams, LouvainConfig, PoolOptions};
use hgnet::datasets::{generate_color_connectivity, make_grid, verify_label, write_dataset, ColorDataset};
use hgnet::graph::{connected_components, load_road_network, read_edge_list, shortest_path_hops, Graph};
use hgnet::hierarchy::{build_hierarchy, hierarchy_stats, verify_bounds_with, EdgePoolParams, Hierarchy, HierarchySpec};
use hgnet::tensor::Matrix;
use hgnet::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Generation = 3,
    Io = 4,
    Parse = 5,
    Usage = 6,
    Divergence = 7,
    Utf8 = 8,
    Panic = 9,
}

/// Opaque undirected graph.
pub struct HgnetGraph {
    inner: Arc<Graph>,
}

/// Opaque coarsening hierarchy.
pub struct HgnetHierarchy {
    inner: Hierarchy,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HgnetStatus {
    match e {
        Error::Input(_) => HgnetStatus::InvalidInput,
        Error::Generation(_) => HgnetStatus::Generation,
        Error::Usage(_) => HgnetStatus::Usage,
        Error::Divergence { .. } => HgnetStatus::Divergence,
        Error::Parse { .. } | Error::Json(_) => HgnetStatus::Parse,
        Error::Io(_) => HgnetStatus::Io,
    }
}

fn fail(status: HgnetStatus, msg: impl Into<String>) -> HgnetStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), HgnetStatus>) -> HgnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HgnetStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(HgnetStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: hgnet::Result<T>) -> Result<T, HgnetStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), HgnetStatus> {
    if p.is_null() {
        Err(fail(HgnetStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `s` must be NULL or a NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, HgnetStatus> {
    non_null(s, what)?;
    CStr::from_ptr(s).to_str().map_err(|_| fail(HgnetStatus::Utf8, format!("{what} is not UTF-8")))
}

fn boxed_graph(g: Graph, out: *mut *mut HgnetGraph) {
    // SAFETY: callers check `out` for NULL first.
    unsafe { *out = Box::into_raw(Box::new(HgnetGraph { inner: Arc::new(g) })) };
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hgnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hgnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from `num_edges` endpoint pairs stored flat in `edges`.
///
/// # Safety
/// `edges` must point to `2 * num_edges` readable values (or be NULL when
/// `num_edges` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_from_edges(
    num_nodes: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut HgnetGraph,
) -> HgnetStatus {
    guard(|| {
        non_null(out, "out")?;
        let flat: &[usize] = if num_edges == 0 {
            &[]
        } else {
            non_null(edges, "edges")?;
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        let g = lift(Graph::new(num_nodes, flat.chunks_exact(2).map(|p| (p[0], p[1]))))?;
        boxed_graph(g, out);
        Ok(())
    })
}

/// 4-neighbor `rows x cols` lattice; node `(r, c)` is `r * cols + c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_grid(rows: usize, cols: usize, out: *mut *mut HgnetGraph) -> HgnetStatus {
    guard(|| {
        non_null(out, "out")?;
        boxed_graph(lift(make_grid(rows, cols))?, out);
        Ok(())
    })
}

/// Reads a whitespace edge list. With `largest_component` nonzero only the
/// largest connected component is kept.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_load_edge_list(
    path: *const c_char,
    largest_component: bool,
    out: *mut *mut HgnetGraph,
) -> HgnetStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let g = if largest_component { lift(load_road_network(path))? } else { lift(read_edge_list(path))?.graph };
        boxed_graph(g, out);
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_free(g: *mut HgnetGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_num_nodes(g: *const HgnetGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.num_nodes())
}

/// Edge count, 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_num_edges(g: *const HgnetGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.num_edges())
}

/// Endpoints `(u <= v)` of edge `e`.
///
/// # Safety
/// `g` must be a live graph handle; `u` and `v` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_graph_edge(g: *const HgnetGraph, e: usize, u: *mut usize, v: *mut usize) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(u, "u")?;
        non_null(v, "v")?;
        let g = &(*g).inner;
        if e >= g.num_edges() {
            return Err(fail(HgnetStatus::InvalidInput, format!("edge {e} out of range")));
        }
        (*u, *v) = g.edge(e);
        Ok(())
    })
}

/// Writes one component label per node into `labels` (numbered by smallest
/// member id) and the component count into `num_components`.
///
/// # Safety
/// `g` must be a live graph handle; `labels` must hold `num_nodes` values.
#[no_mangle]
pub unsafe extern "C" fn hgnet_connected_components(
    g: *const HgnetGraph,
    labels: *mut usize,
    num_components: *mut usize,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(num_components, "num_components")?;
        let g = &(*g).inner;
        let cc = lift(connected_components(g, None))?;
        if g.num_nodes() > 0 {
            non_null(labels, "labels")?;
            let out = std::slice::from_raw_parts_mut(labels, g.num_nodes());
            for (o, l) in out.iter_mut().zip(&cc.labels) {
                *o = l.expect("every node is labeled");
            }
        }
        *num_components = cc.num_components;
        Ok(())
    })
}

/// Hop distance between `u` and `v`, or -1 when they are disconnected.
///
/// # Safety
/// `g` must be a live graph handle; `hops` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_shortest_path_hops(
    g: *const HgnetGraph,
    u: usize,
    v: usize,
    hops: *mut i64,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(hops, "hops")?;
        *hops = lift(shortest_path_hops(&(*g).inner, u, v))?.map_or(-1, |h| h as i64);
        Ok(())
    })
}

/// Louvain communities: one community id per node, the community count and
/// the partition's modularity.
///
/// # Safety
/// `g` must be a live graph handle; `assignment` must hold `num_nodes`
/// values; the scalar outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_louvain(
    g: *const HgnetGraph,
    seed: u64,
    assignment: *mut usize,
    num_communities: *mut usize,
    modularity: *mut f64,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(num_communities, "num_communities")?;
        non_null(modularity, "modularity")?;
        let g = &(*g).inner;
        let r = lift(louvain_with(g, seed, &LouvainConfig::default()))?;
        if g.num_nodes() > 0 {
            non_null(assignment, "assignment")?;
            std::slice::from_raw_parts_mut(assignment, g.num_nodes()).copy_from_slice(&r.assignment);
        }
        *num_communities = r.num_communities;
        *modularity = r.modularity;
        Ok(())
    })
}

/// Color-connectivity label of a coloring (`colors[u]` nonzero = red):
/// 1 for one red island, 0 for two, -1 otherwise.
///
/// # Safety
/// `g` must be a live graph handle; `colors` must hold `num_nodes` bytes.
#[no_mangle]
pub unsafe extern "C" fn hgnet_verify_label(g: *const HgnetGraph, colors: *const u8, label: *mut i32) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(label, "label")?;
        let g = &(*g).inner;
        let colors: Vec<bool> = if g.num_nodes() == 0 {
            Vec::new()
        } else {
            non_null(colors, "colors")?;
            std::slice::from_raw_parts(colors, g.num_nodes()).iter().map(|&c| c != 0).collect()
        };
        *label = verify_label(g, &colors).map_or(-1, i32::from);
        Ok(())
    })
}

/// Generates `n_samples` balanced color-connectivity samples over `g` and
/// writes them as JSON Lines to `out_path`.
///
/// # Safety
/// `g` must be a live graph handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hgnet_generate_color_connectivity(
    g: *const HgnetGraph,
    n_samples: usize,
    seed: u64,
    topology_id: *const c_char,
    out_path: *const c_char,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        let topology_id = str_arg(topology_id, "topology_id")?.to_owned();
        let out_path = str_arg(out_path, "out_path")?;
        let topology = Arc::clone(&(*g).inner);
        let samples = lift(generate_color_connectivity(&topology, n_samples, seed))?;
        let file = lift(File::create(out_path).map_err(Error::from))?;
        lift(write_dataset(&ColorDataset { topology_id, topology, samples }, BufWriter::new(file)))
    })
}

/// EdgePool hierarchy with uniform edge scores (ties broken by node ids),
/// at most `levels` rounds.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_build_edgepool(
    g: *const HgnetGraph,
    levels: usize,
    out: *mut *mut HgnetHierarchy,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(out, "out")?;
        let g = &(*g).inner;
        let x = Matrix::filled(g.num_nodes(), 1, 1.0);
        let p = EdgeScoreParams::zeros(1);
        let spec = HierarchySpec::EdgePool { features: &x, params: EdgePoolParams::Shared(&p) };
        let h = lift(build_hierarchy(g, levels, spec))?.hierarchy;
        *out = Box::into_raw(Box::new(HgnetHierarchy { inner: h }));
        Ok(())
    })
}

/// Louvain hierarchy, at most `levels` rounds.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_build_louvain(
    g: *const HgnetGraph,
    levels: usize,
    seed: u64,
    out: *mut *mut HgnetHierarchy,
) -> HgnetStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(out, "out")?;
        let spec = HierarchySpec::Louvain { seed, features: None, pool: PoolOptions::default() };
        let h = lift(build_hierarchy(&(*g).inner, levels, spec))?.hierarchy;
        *out = Box::into_raw(Box::new(HgnetHierarchy { inner: h }));
        Ok(())
    })
}

/// Coarsening rounds applied, 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live hierarchy handle.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_depth(h: *const HgnetHierarchy) -> usize {
    h.as_ref().map_or(0, |h| h.inner.depth())
}

/// Node count of `level` (0 = input graph), 0 when out of range or NULL.
///
/// # Safety
/// `h` must be NULL or a live hierarchy handle.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_level_size(h: *const HgnetHierarchy, level: usize) -> usize {
    h.as_ref().and_then(|h| h.inner.levels.get(level)).map_or(0, |g| g.num_nodes())
}

/// JSON report `{"bounds": ..., "stats": ...}` with exhaustive routing and
/// matched-fraction parameter `m`. Release with [`hgnet_string_free`].
///
/// # Safety
/// `h` must be a live hierarchy handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_report_json(
    h: *const HgnetHierarchy,
    m: f64,
    json: *mut *mut c_char,
) -> HgnetStatus {
    guard(|| {
        non_null(h, "hierarchy")?;
        non_null(json, "json")?;
        let h = &(*h).inner;
        let stats = hierarchy_stats(h);
        let bounds = lift(verify_bounds_with(h, m, &stats))?;
        let text = serde_json::json!({ "bounds": bounds, "stats": stats }).to_string();
        *json = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn hgnet_hierarchy_free(h: *mut HgnetHierarchy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn hgnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
