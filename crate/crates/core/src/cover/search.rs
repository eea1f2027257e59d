//! Exhaustive search for non-vanishing constant covers with a prescribed length profile.
//!
//! Rows of the fuzzy matrices are generated one position at a time: row `x` of the
//! fuzzy matrix of `σ` only involves `σ(1), ..., σ(min(k, x))`. Each node of the search
//! fixes those prefixes for every term and carries the echelon form of the linear system
//! `Σ d_i G_i(x, y) - c = 0` over the rows seen so far. A node is discarded as soon as
//! the system forces one of the unknowns to vanish.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::echelon::Echelon;
use super::{canonicalize_cover, f_int, solve_cover, ConstantCover, LengthProfile};
use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of generated nodes before giving up.
    pub budget: u64,
    /// Stop after this many rows; `None` searches all `n` rows.
    pub max_depth: Option<usize>,
    /// Use the generic search even for `(n, ..., n)` with `n` terms.
    pub force_generic: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 100_000_000,
            max_depth: None,
            force_generic: false,
        }
    }
}

/// Nodes generated and kept at one row of the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelStat {
    pub depth: usize,
    pub generated: u64,
    pub survivors: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub profile: LengthProfile,
    pub n: usize,
    /// One canonical representative per symmetry class of proper covers.
    #[serde(serialize_with = "serialize_covers")]
    pub covers: Vec<ConstantCover>,
    /// Number of permutation sets (before symmetry reduction) carrying a proper cover.
    pub raw_count: usize,
    /// Permutation sets whose constant combinations form a space of dimension at least 2.
    pub reducible: Vec<Vec<Permutation>>,
    pub levels: Vec<LevelStat>,
    /// Deepest row at which some node survived (0 if none survived the first row).
    pub depth_reached: usize,
    /// False when the search stopped at `max_depth` before the last row.
    pub complete: bool,
}

fn serialize_covers<S: serde::Serializer>(covers: &[ConstantCover], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(covers.len()))?;
    for c in covers {
        seq.serialize_element(&super::CoverRecord::from(c))?;
    }
    seq.end()
}

#[derive(Clone)]
enum System {
    Small(Echelon<i128>),
    Big(Echelon<BigInt>),
}

impl System {
    fn extend(&self, rows: &[Vec<i64>]) -> System {
        if let System::Small(e) = self {
            let mut next = e.clone();
            if rows.iter().all(|r| next.insert(r.iter().map(|&v| v as i128).collect()).is_ok()) {
                return System::Small(next);
            }
        }
        let mut big = match self {
            System::Small(e) => e.to_big(),
            System::Big(e) => e.clone(),
        };
        for r in rows {
            big.insert(r.iter().map(|&v| BigInt::from(v)).collect())
                .expect("arbitrary precision");
        }
        System::Big(big)
    }

    fn forces_a_zero(&self) -> bool {
        match self {
            System::Small(e) => e.forces_a_zero(),
            System::Big(e) => e.forces_a_zero(),
        }
    }
}

#[derive(Clone)]
struct Node {
    prefixes: Vec<Vec<u8>>,
    system: System,
}

struct Search<'a> {
    orders: &'a [usize],
    n: usize,
    /// `f[k][j][x]` for the orders in the profile.
    f: Vec<Vec<Vec<i64>>>,
    budget: u64,
    generated: AtomicU64,
}

impl Search<'_> {
    /// Row `x` (1-based) of every term, as equations `(G_1, ..., G_r, -1)` indexed by column.
    fn equations(&self, prefixes: &[Vec<u8>], x: usize) -> Vec<Vec<i64>> {
        let n = self.n;
        (1..=n)
            .map(|y| {
                let mut eq: Vec<i64> = prefixes
                    .iter()
                    .zip(self.orders)
                    .map(|(pre, &k)| {
                        let lo = x.saturating_sub(n - k).max(1);
                        (lo..=k.min(x))
                            .map(|j| self.f[k][j][x] * self.f[k][pre[j - 1] as usize][y])
                            .sum()
                    })
                    .collect();
                eq.push(-1);
                eq
            })
            .collect()
    }

    fn children(&self, node: &Node, x: usize) -> Result<Vec<Node>> {
        let mut out = Vec::new();
        let mut prefixes = node.prefixes.clone();
        self.extend_term(node, x, 0, &mut prefixes, &mut out)?;
        Ok(out)
    }

    fn extend_term(
        &self,
        node: &Node,
        x: usize,
        i: usize,
        prefixes: &mut Vec<Vec<u8>>,
        out: &mut Vec<Node>,
    ) -> Result<()> {
        let r = self.orders.len();
        if i == r {
            let count = self.generated.fetch_add(1, Ordering::Relaxed) + 1;
            if count > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            let system = node.system.extend(&self.equations(prefixes, x));
            if !system.forces_a_zero() {
                out.push(Node { prefixes: prefixes.clone(), system });
            }
            return Ok(());
        }
        let k = self.orders[i];
        let same_as_prev = i > 0 && self.orders[i - 1] == k;
        if x > k {
            if same_as_prev && x == k + 1 && prefixes[i - 1] >= prefixes[i] {
                return Ok(());
            }
            return self.extend_term(node, x, i + 1, prefixes, out);
        }
        for v in 1..=k as u8 {
            if prefixes[i].contains(&v) {
                continue;
            }
            prefixes[i].push(v);
            let ordered = !same_as_prev || {
                let (a, b) = (&prefixes[i - 1], &prefixes[i]);
                if x == k { a < b } else { a <= b }
            };
            if ordered {
                self.extend_term(node, x, i + 1, prefixes, out)?;
            }
            prefixes[i].pop();
        }
        Ok(())
    }
}

fn to_perm(word: &[u8]) -> Permutation {
    Permutation::new(word.iter().map(|&v| v as u32).collect()).expect("complete prefix")
}

fn collect_covers(
    profile: &LengthProfile,
    n: usize,
    sets: Vec<Vec<Permutation>>,
    levels: Vec<LevelStat>,
    depth_reached: usize,
    complete: bool,
) -> Result<SearchResult> {
    let solved: Vec<(Vec<Permutation>, Vec<ConstantCover>)> = sets
        .into_par_iter()
        .map(|s| solve_cover(&s, n).map(|c| (s, c)))
        .collect::<Result<_>>()?;
    let mut classes = BTreeMap::new();
    let mut raw_count = 0;
    let mut reducible = Vec::new();
    for (set, basis) in solved {
        match basis.as_slice() {
            [one] if one.terms.len() == set.len() && !num_traits::Zero::is_zero(&one.c) => {
                raw_count += 1;
                let canon = canonicalize_cover(one);
                classes.entry(canon.to_string()).or_insert(canon);
            }
            [] | [_] => {}
            _ => reducible.push(set),
        }
    }
    Ok(SearchResult {
        profile: profile.clone(),
        n,
        covers: classes.into_values().collect(),
        raw_count,
        reducible,
        levels,
        depth_reached,
        complete,
    })
}

/// All non-vanishing covers with the given profile, with `n` the largest order.
pub fn search_covers(profile: &LengthProfile, opts: &SearchOptions) -> Result<SearchResult> {
    let n = profile.n();
    if n > 7 {
        return Err(Error::OutOfRange { what: "n", value: n, min: 2, max: 7 });
    }
    let orders = profile.orders();
    let r = orders.len();
    if profile.is_latin_type() && r == n && !opts.force_generic && opts.max_depth.is_none() {
        let sets = latin_covers(n)?;
        let levels = vec![LevelStat { depth: n, generated: sets.len() as u64, survivors: sets.len() as u64 }];
        return collect_covers(profile, n, sets, levels, n, true);
    }
    let f = (0..=n)
        .map(|k| {
            (0..=k)
                .map(|j| (0..=n).map(|x| if k == 0 { 0 } else { f_int(k, j, n, x) as i64 }).collect())
                .collect()
        })
        .collect();
    let search = Search {
        orders,
        n,
        f,
        budget: opts.budget,
        generated: AtomicU64::new(0),
    };
    let last = opts.max_depth.unwrap_or(n).min(n);
    let mut frontier = vec![Node {
        prefixes: vec![Vec::new(); r],
        system: System::Small(Echelon::new(r + 1)),
    }];
    let mut levels = Vec::new();
    let mut depth_reached = 0;
    for x in 1..=last {
        let before = search.generated.load(Ordering::Relaxed);
        let next: Vec<Vec<Node>> = frontier
            .par_iter()
            .map(|node| search.children(node, x))
            .collect::<Result<_>>()?;
        frontier = next.into_iter().flatten().collect();
        levels.push(LevelStat {
            depth: x,
            generated: search.generated.load(Ordering::Relaxed) - before,
            survivors: frontier.len() as u64,
        });
        if frontier.is_empty() {
            break;
        }
        depth_reached = x;
    }
    let complete = last == n || frontier.is_empty();
    let sets = if last == n {
        frontier
            .iter()
            .map(|node| node.prefixes.iter().map(|p| to_perm(p)).collect())
            .collect()
    } else {
        Vec::new()
    };
    collect_covers(profile, n, sets, levels, depth_reached, complete)
}

/// Sets of `n` permutations of order `n` whose matrices sum to `J_n` (rows of a latin
/// square, unordered), listed with `σ_i(1) = i`.
pub fn latin_covers(n: usize) -> Result<Vec<Vec<Permutation>>> {
    if !(2..=6).contains(&n) {
        return Err(Error::OutOfRange { what: "n", value: n, min: 2, max: 6 });
    }
    // square[i][x] = σ_i(x + 1)
    let mut square = vec![vec![0u8; n]; n];
    let mut used_in_perm = vec![0u32; n];
    for (i, row) in square.iter_mut().enumerate() {
        row[0] = i as u8 + 1;
        used_in_perm[i] = 1 << (i + 1);
    }
    let mut out = Vec::new();
    fn fill(
        n: usize,
        x: usize,
        i: usize,
        used_at_x: u32,
        square: &mut Vec<Vec<u8>>,
        used: &mut Vec<u32>,
        out: &mut Vec<Vec<Permutation>>,
    ) {
        if x == n {
            out.push(square.iter().map(|w| to_perm(w)).collect());
            return;
        }
        if i == n {
            fill(n, x + 1, 0, 0, square, used, out);
            return;
        }
        for v in 1..=n as u8 {
            let bit = 1u32 << v;
            if used_at_x & bit != 0 || used[i] & bit != 0 {
                continue;
            }
            square[i][x] = v;
            used[i] |= bit;
            fill(n, x, i + 1, used_at_x | bit, square, used, out);
            used[i] &= !bit;
        }
    }
    fill(n, 1, 0, 0, &mut square, &mut used_in_perm, &mut out);
    Ok(out)
}
