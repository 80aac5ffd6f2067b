//! Benchmark data: color-connectivity samples over grids and road networks,
//! homophilous block-model graphs, citation CSVs and k-hop sanitized splits.

mod citation;
mod color;
mod splits;
mod synthetic;

pub use citation::{load_citation_csv, NodeTask};
pub use color::{
    generate_color_connectivity, generate_color_connectivity_with, make_grid, read_dataset, verify_label,
    verify_red_set, write_dataset, ColorDataset, DatasetSample, GenerationConfig, Topology,
};
pub use splits::{sanitized_resample, SplitCounts, SplitSpec};
pub use synthetic::{make_homophilous_sbm, make_homophilous_sbm_with, random_connected_graph, SbmConfig};
