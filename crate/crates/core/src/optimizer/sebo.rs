//! Successive exhaustive Boolean optimization over antenna coders.
//!
//! Stage 1 cycles through fixed-size bit blocks of every coder and tries
//! all settings of the active block, keeping strict improvements, until a
//! whole cycle changes nothing. Stage 2 perturbs the incumbent by flipping
//! random bits, reruns stage 1, and keeps the result only if it is better.
//! Each perturbation starts from the current incumbent.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::multiport::AntennaCoder;
use crate::scalar::Real;

/// Objective over a list of antenna coders (transmit coders first).
pub trait CoderObjective<T: Real> {
    fn evaluate(&mut self, coders: &[AntennaCoder]) -> Result<T>;
}

impl<T: Real, F: FnMut(&[AntennaCoder]) -> Result<T>> CoderObjective<T> for F {
    fn evaluate(&mut self, coders: &[AntennaCoder]) -> Result<T> {
        self(coders)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeboOptions {
    /// Bits searched exhaustively at once (J).
    pub block_size: usize,
    /// Cap on stage-1 cycles per run.
    pub max_cycles: usize,
    /// Number of perturb-and-rerun rounds.
    pub restarts: usize,
    /// Bits flipped in each coder per perturbation.
    pub flip_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeboOutcome<T: Real> {
    pub coders: Vec<AntennaCoder>,
    pub value: T,
    pub initial_value: T,
    pub evaluations: usize,
    pub accepted_moves: usize,
    /// Restarts whose result replaced the incumbent.
    pub improved_restarts: usize,
}

/// Coders whose pattern collapses or whose switch network is singular are
/// simply infeasible candidates.
fn infeasible(err: &Error) -> bool {
    matches!(err, Error::ZeroPattern { .. } | Error::SingularSystem { .. })
}

struct Search<'o, O> {
    objective: &'o mut O,
    evaluations: usize,
    accepted_moves: usize,
}

impl<O> Search<'_, O> {
    fn eval<T: Real>(&mut self, coders: &[AntennaCoder]) -> Result<Option<T>>
    where
        O: CoderObjective<T>,
    {
        self.evaluations += 1;
        match self.objective.evaluate(coders) {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(_) => Ok(None),
            Err(e) if infeasible(&e) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Cyclic block-exhaustive ascent from `coders` (value `value`).
    fn descend<T: Real>(&mut self, coders: &mut [AntennaCoder], mut value: T, opts: &SeboOptions) -> Result<T>
    where
        O: CoderObjective<T>,
    {
        for _ in 0..opts.max_cycles {
            let mut improved = false;
            for a in 0..coders.len() {
                let q = coders[a].len();
                let mut start = 0;
                while start < q {
                    let width = opts.block_size.min(q - start);
                    let current = read_block(&coders[a], start, width);
                    let mut best: Option<(u64, T)> = None;
                    for pattern in 0..(1u64 << width) {
                        if pattern == current {
                            continue;
                        }
                        write_block(&mut coders[a], start, width, pattern);
                        if let Some(v) = self.eval(coders)? {
                            let threshold = best.map_or(value, |(_, b)| b);
                            if v > threshold {
                                best = Some((pattern, v));
                            }
                        }
                    }
                    match best {
                        Some((pattern, v)) => {
                            write_block(&mut coders[a], start, width, pattern);
                            value = v;
                            improved = true;
                            self.accepted_moves += 1;
                        }
                        None => write_block(&mut coders[a], start, width, current),
                    }
                    start += width;
                }
            }
            if !improved {
                break;
            }
        }
        Ok(value)
    }
}

/// Block bits as an integer, first bit most significant, so ascending
/// integers enumerate bit strings in lexicographic order.
fn read_block(coder: &AntennaCoder, start: usize, width: usize) -> u64 {
    (0..width).fold(0u64, |acc, j| (acc << 1) | coder.is_open(start + j) as u64)
}

fn write_block(coder: &mut AntennaCoder, start: usize, width: usize, pattern: u64) {
    for j in 0..width {
        coder.set(start + j, (pattern >> (width - 1 - j)) & 1 == 1);
    }
}

/// Run SEBO from `initial`. The result is never worse than the start.
pub fn sebo<T, O, R>(objective: &mut O, initial: Vec<AntennaCoder>, opts: &SeboOptions, rng: &mut R) -> Result<SeboOutcome<T>>
where
    T: Real,
    O: CoderObjective<T>,
    R: Rng + ?Sized,
{
    if opts.block_size == 0 || opts.block_size > 20 {
        return Err(Error::InvalidParameter(format!(
            "SEBO block size must be in 1..=20, got {}",
            opts.block_size
        )));
    }
    let mut search = Search {
        objective,
        evaluations: 0,
        accepted_moves: 0,
    };
    let initial_value = search
        .eval(&initial)?
        .ok_or(Error::ZeroPattern { element: None })?;

    let mut incumbent = initial;
    let mut best = search.descend(&mut incumbent, initial_value, opts)?;
    let mut improved_restarts = 0;

    for _ in 0..opts.restarts {
        if opts.flip_count == 0 {
            break;
        }
        let mut candidate = incumbent.clone();
        for coder in candidate.iter_mut() {
            let q = coder.len();
            for bit in sample(rng, q, opts.flip_count.min(q)).iter() {
                coder.flip(bit);
            }
        }
        let Some(start_value) = search.eval(&candidate)? else {
            continue;
        };
        let value = search.descend(&mut candidate, start_value, opts)?;
        if value > best {
            best = value;
            incumbent = candidate;
            improved_restarts += 1;
        }
    }

    Ok(SeboOutcome {
        coders: incumbent,
        value: best,
        initial_value,
        evaluations: search.evaluations,
        accepted_moves: search.accepted_moves,
        improved_restarts,
    })
}
