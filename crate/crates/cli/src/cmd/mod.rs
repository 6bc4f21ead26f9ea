pub mod bench;
pub mod index;
pub mod knn;
pub mod metrics;
pub mod svgd;
pub mod validate;
