//! BB84 key agreement between the data owner and the attribute authority
//! over a configurable channel, with sifting, check-bit sampling, and abort
//! on excessive error rate. Produces the m-bit seed for the keystream.
//!
//! The channel either forwards photons untouched or applies an
//! intercept-resend eavesdropper, who measures each photon in a random
//! basis and forwards the collapsed state. That attack disturbs each
//! checked bit with probability 1/4, so sacrificing k bits catches the
//! eavesdropper with probability 1 − (3/4)^k.

use thiserror::Error;

use crate::bits::BitString;
use crate::quantum::{self, Basis};
use crate::rng::RandomSource;

#[derive(Debug, Error, PartialEq)]
pub enum Bb84Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sifting produced {got} usable bits, {needed} needed")]
    InsufficientSiftedBits { needed: usize, got: usize },
    #[error("aborted: measured QBER {qber} exceeded the threshold")]
    Aborted { qber: f64 },
}

/// Channel between the two parties during the quantum phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Ideal,
    InterceptResend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BB84Config {
    /// Bits required in the agreed key.
    pub target_m: usize,
    /// Photons sent before sifting.
    pub raw_count: usize,
    /// Fraction of sifted bits sacrificed for error estimation, in (0, 1).
    pub check_fraction: f64,
    /// Abort when the measured QBER exceeds this, in [0, 1).
    pub qber_abort_threshold: f64,
}

impl BB84Config {
    /// Defaults for an m-bit key: half the sifted bits are checked, the
    /// abort threshold is 0.11, and the photon budget carries a 2× margin
    /// over the expected-yield guard.
    pub fn for_key_length(m: usize) -> BB84Config {
        BB84Config {
            target_m: m,
            raw_count: 16 * m,
            check_fraction: 0.5,
            qber_abort_threshold: 0.11,
        }
    }

    pub fn validate(&self) -> Result<(), Bb84Error> {
        let fail = |msg: String| Err(Bb84Error::InvalidConfig(msg));
        if self.target_m == 0 {
            return fail("target key length must be positive".into());
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return fail(format!("check fraction {} not in (0, 1)", self.check_fraction));
        }
        if !(0.0..1.0).contains(&self.qber_abort_threshold) {
            return fail(format!(
                "abort threshold {} not in [0, 1)",
                self.qber_abort_threshold
            ));
        }
        // expected-yield guard: half the photons sift, a check fraction is
        // sacrificed, and a 2× margin must remain
        let needed = 4.0 * self.target_m as f64 / (1.0 - self.check_fraction);
        if (self.raw_count as f64) < needed {
            return fail(format!(
                "raw_count {} below the expected-yield guard {}",
                self.raw_count,
                needed.ceil()
            ));
        }
        Ok(())
    }
}

/// How one photon ended up being used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    /// Receiver chose the other basis; position discarded in sifting.
    BasisMismatch,
    /// Sifted and publicly compared for error estimation.
    Checked,
    /// Sifted and kept as a key bit.
    Key,
    /// Sifted but beyond the requested key length.
    Surplus,
}

/// Per-photon record of one run; replays bit-identically from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRecord {
    pub sender_bit: u8,
    pub sender_basis: Basis,
    pub receiver_basis: Basis,
    pub receiver_bit: u8,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BB84Result {
    /// The sender's agreed key bits (empty when aborted).
    pub key_do: BitString,
    /// The receiver's agreed key bits. Equal to `key_do` on an ideal
    /// channel; an undetected eavesdropper may leave residual disagreement
    /// since no reconciliation is performed.
    pub key_aa: BitString,
    pub qber: f64,
    pub aborted: bool,
    pub sifted_count: usize,
    pub checked_count: usize,
    pub transcript: Vec<PhotonRecord>,
}

impl BB84Result {
    /// The shared key, or the abort outcome carrying the measured QBER.
    pub fn key(&self) -> Result<&BitString, Bb84Error> {
        if self.aborted {
            Err(Bb84Error::Aborted { qber: self.qber })
        } else {
            Ok(&self.key_do)
        }
    }
}

/// Runs the protocol once (re-running internally in the vanishing case of
/// an all-zero key, which would be a degenerate keystream seed). An abort
/// is reported in the result, not as an error.
pub fn run_bb84(
    config: &BB84Config,
    channel: ChannelModel,
    rng: &mut RandomSource,
) -> Result<BB84Result, Bb84Error> {
    config.validate()?;
    for _ in 0..10_000 {
        let result = run_once(config, channel, rng)?;
        let degenerate =
            !result.aborted && (result.key_do.is_all_zero() || result.key_aa.is_all_zero());
        if !degenerate {
            return Ok(result);
        }
    }
    Err(Bb84Error::InvalidConfig(
        "could not produce a nonzero key".into(),
    ))
}

fn run_once(
    config: &BB84Config,
    channel: ChannelModel,
    rng: &mut RandomSource,
) -> Result<BB84Result, Bb84Error> {
    let mut transcript = Vec::with_capacity(config.raw_count);
    for _ in 0..config.raw_count {
        let sender_bit = rng.gen_bit();
        let sender_basis = Basis::from_bit(rng.gen_bit());
        let mut photon = quantum::prepare(sender_bit, sender_basis);

        if channel == ChannelModel::InterceptResend {
            let eve_basis = Basis::from_bit(rng.gen_bit());
            // measurement collapses the photon; forwarding it is the resend
            quantum::measure(&mut photon, eve_basis, rng);
        }

        let receiver_basis = Basis::from_bit(rng.gen_bit());
        let receiver_bit = quantum::measure(&mut photon, receiver_basis, rng);
        transcript.push(PhotonRecord {
            sender_bit,
            sender_basis,
            receiver_basis,
            receiver_bit,
            disposition: Disposition::BasisMismatch,
        });
    }

    let sifted: Vec<usize> = (0..transcript.len())
        .filter(|&i| transcript[i].sender_basis == transcript[i].receiver_basis)
        .collect();
    let checked_count = (sifted.len() as f64 * config.check_fraction).floor() as usize;
    let check_slots = rng.choose_indices(sifted.len(), checked_count);

    let mut mismatches = 0usize;
    for &slot in &check_slots {
        let record = &mut transcript[sifted[slot]];
        record.disposition = Disposition::Checked;
        if record.sender_bit != record.receiver_bit {
            mismatches += 1;
        }
    }
    let qber = if checked_count == 0 {
        0.0
    } else {
        mismatches as f64 / checked_count as f64
    };

    if qber > config.qber_abort_threshold {
        return Ok(BB84Result {
            key_do: BitString::default(),
            key_aa: BitString::default(),
            qber,
            aborted: true,
            sifted_count: sifted.len(),
            checked_count,
            transcript,
        });
    }

    let remaining: Vec<usize> = sifted
        .iter()
        .copied()
        .filter(|&i| transcript[i].disposition == Disposition::BasisMismatch)
        .collect();
    if remaining.len() < config.target_m {
        return Err(Bb84Error::InsufficientSiftedBits {
            needed: config.target_m,
            got: remaining.len(),
        });
    }
    let mut key_do = BitString::default();
    let mut key_aa = BitString::default();
    for (slot, &i) in remaining.iter().enumerate() {
        if slot < config.target_m {
            transcript[i].disposition = Disposition::Key;
            key_do.push(transcript[i].sender_bit);
            key_aa.push(transcript[i].receiver_bit);
        } else {
            transcript[i].disposition = Disposition::Surplus;
        }
    }

    Ok(BB84Result {
        key_do,
        key_aa,
        qber,
        aborted: false,
        sifted_count: sifted.len(),
        checked_count,
        transcript,
    })
}
