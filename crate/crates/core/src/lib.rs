//! Analysis toolkit for citations to retracted publications.
//!
//! The crate follows the pipeline stages end to end:
//!
//! - [`ingest`]: parse retraction records, filter humanities items, apply
//!   exclusion lists and tally summary tables.
//! - [`harvest`]: fetch citation links from open citation index sources,
//!   merge them across sources and enrich citing entities.
//! - [`affinity`]: the 0..=5 humanities affinity score and its threshold filter.
//! - [`timeline`]: pre/during/post retraction periods, normalized positions
//!   and fifth bins, and years-after-retraction series.
//! - [`annotation`]: in-text citations, citation contexts, section labels,
//!   the CiTO decision tree and the append-only annotation store.
//! - [`textproc`]: tokenization and bag-of-words corpora.
//! - [`topics`]: collapsed Gibbs LDA, UMass coherence, relevance ranking,
//!   inter-topic maps and metadata-grouped topic tables.
//! - [`reports`]: descriptive statistics and visualization bundles.
//!
//! Every stage reads and writes plain JSON/CSV files so that intermediate
//! results can be audited and re-run independently.

pub mod affinity;
pub mod annotation;
pub mod doi;
pub mod harvest;
pub mod hashing;
pub mod humanities;
pub mod ingest;
pub mod percent;
pub mod reports;
pub mod synthetic;
pub mod textproc;
pub mod timeline;
pub mod topics;

pub use doi::Doi;
