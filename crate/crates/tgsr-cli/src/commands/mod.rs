pub mod evaluate;
pub mod grid_search;
pub mod predict;
pub mod report_regions;
pub mod solve;
pub mod synth;
