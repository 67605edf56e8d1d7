//! Block-MDS quasi-cyclic LDPC codes for syndrome-based information
//! reconciliation.
//!
//! The crate covers code construction and certification ([`qcldpc`],
//! [`blockmds`]) over small binary extension fields ([`gf`]), and a Monte
//! Carlo reconciliation simulator ([`channel`], [`decoder`], [`sim`]) that
//! compares full-codeword decoding against decoding a selected subset of
//! block columns.

pub mod blockmds;
pub mod channel;
pub mod codefile;
pub mod decoder;
pub mod gf;
pub mod linalg;
pub mod qcldpc;
pub mod sim;

pub use blockmds::{BlockMdsCertificate, BlockSubset};
pub use codefile::{load_code, parse_code, save_code, shipped_code, CodeFile};
pub use gf::{FieldElem, FieldSpec, Poly};
pub use linalg::DenseMatrix;
pub use qcldpc::{Girth, PowerMatrix, QcCode, ScalingMatrix, SparseParityCheck};
pub use sim::{run_point, PointOptions, PointResult, SimConfig};
