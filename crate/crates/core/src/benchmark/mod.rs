//! Downstream benchmark construction: multi-label targets from coarse
//! land-cover rasters, segmentation masks from fine ones, class
//! rebalancing and leakage-free splits.

mod io;
mod labels;
mod resample;
mod select;

pub use io::{
    build_multilabel, build_segmentation, filter_season, mask_class_histogram, multilabel_class_histogram, read_mask,
    read_mask_dir, read_multilabel_jsonl, write_class_histogram_csv, write_mask, write_mask_dir, write_multilabel_jsonl,
};
pub use labels::{AggregationMap, LabelRaster, Target, IGNORE};
pub use resample::{multilabel_from_raster, resample, segmentation_mask, MultiLabelTarget, Resampling, SegmentationPair};
pub use select::{make_split, rebalance, RebalanceReport, SeasonFilter, Split};
