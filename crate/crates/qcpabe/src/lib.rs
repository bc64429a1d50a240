//! Desk-scale simulator for quantum ciphertext-policy attribute-based
//! encryption: BB84 key agreement, conjugate-coding encryption, attribute
//! key distribution through either classical linear secret sharing or
//! CSS-code quantum secret sharing, and dynamic access-structure upkeep.

pub mod bb84;
pub mod bits;
pub mod conjugate;
pub mod css;
pub mod keystream;
pub mod lsss;
pub mod policy;
pub mod quantum;
pub mod rng;

pub use bits::BitString;
pub use rng::RandomSource;
