//! Tile rasters: the HSRC container, band masks, windowed reads, tile
//! manifests and cloud filtering.

mod catalog;
mod export;
mod format;
mod ingest;
mod mask;
mod window;

pub use catalog::{
    cloud_fraction_from_mask, filter_by_cloud, format_timestamp, parse_timestamp, read_catalog, read_tile_manifest,
    write_catalog, RejectReason, TileEntry,
};
pub use export::{export_patches, ExportSummary};
pub use format::{
    read_block, read_header, read_raster, write_raster, DType, Raster, RasterHeader, Sample, DEFAULT_NODATA, HEADER_LEN,
};
pub use ingest::{ingest, IngestOptions, IngestReport, Rejection};
pub use mask::{apply_band_mask, BandMask, ENMAP_SOURCE_BANDS, ENMAP_STANDIN_EXCLUDED};
pub use window::{read_patch, read_window, read_window_in, validate_tile_raster, write_patch, PatchCube, Provenance};
