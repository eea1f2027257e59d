//! Rooted permutations, the unrooting operator and the flag product.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{count_pattern, enumerate_sn, parse_permutation, FormalSum, Permutation, Symmetry};
use crate::scalar::{binomial, binomial_rational, format_rational, parse_rational};
use crate::Rational;

/// A permutation `π` with a set `R` of root positions (1-based, sorted).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedPermutation {
    base: Permutation,
    roots: Vec<usize>,
}

impl RootedPermutation {
    pub fn new(base: Permutation, mut roots: Vec<usize>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = base.order();
        roots.sort_unstable();
        for (i, &r) in roots.iter().enumerate() {
            if r == 0 || r > n {
                return Err(Error::RootOutOfRange { position: r, order: n });
            }
            if i > 0 && roots[i - 1] == r {
                return Err(Error::DuplicateValue(r));
            }
        }
        Ok(RootedPermutation { base, roots })
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// The pattern induced by the root positions.
    pub fn root_type(&self) -> Permutation {
        let zero_based: Vec<usize> = self.roots.iter().map(|r| r - 1).collect();
        self.base.restrict(&zero_based)
    }

    pub fn apply_symmetry(&self, s: Symmetry) -> RootedPermutation {
        let n = self.order();
        let base = s.apply(&self.base);
        let mut roots: Vec<usize> = self
            .roots
            .iter()
            .map(|&r| s.map_point(n, (r, self.base.at(r))).0)
            .collect();
        roots.sort_unstable();
        RootedPermutation { base, roots }
    }

    /// The rooted permutation induced on the sorted 0-based `positions`, keeping as roots
    /// those positions that are roots here.
    fn induced(&self, positions: &[usize]) -> RootedPermutation {
        let base = self.base.restrict(positions);
        let roots = positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| self.roots.binary_search(&(p + 1)).is_ok())
            .map(|(i, _)| i + 1)
            .collect();
        RootedPermutation { base, roots }
    }
}

/// Parses a word and a list of 1-based root positions.
pub fn parse_rooted(word: &str, roots: &[usize]) -> Result<RootedPermutation> {
    RootedPermutation::new(parse_permutation(word)?, roots.to_vec())
}

impl fmt::Display for RootedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let roots: Vec<String> = self.roots.iter().map(usize::to_string).collect();
        write!(f, "{}:r={}", self.base, roots.join(","))
    }
}

impl fmt::Debug for RootedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rooted({self})")
    }
}

impl FromStr for RootedPermutation {
    type Err = Error;

    /// `"1324:r=2,4"`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "rooted permutation",
            text: s.to_string(),
        };
        let (word, roots) = s.trim().split_once(":r=").ok_or_else(err)?;
        let roots = roots
            .split(',')
            .map(|r| r.trim().parse::<usize>().map_err(|_| err()))
            .collect::<Result<Vec<_>>>()?;
        parse_rooted(word, &roots)
    }
}

/// A rational combination of rooted permutations sharing one root type.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct RootedSum {
    terms: BTreeMap<RootedPermutation, Rational>,
}

impl RootedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(coeff: Rational, rp: RootedPermutation) -> Self {
        let mut s = Self::new();
        s.terms.insert(rp, coeff);
        s.terms.retain(|_, c| !c.is_zero());
        s
    }

    /// Root type of the terms, `None` for the zero sum.
    pub fn root_type(&self) -> Option<Permutation> {
        self.terms.keys().next().map(RootedPermutation::root_type)
    }

    pub fn add_term(&mut self, coeff: Rational, rp: RootedPermutation) -> Result<()> {
        if let Some(tau) = self.root_type() {
            let other = rp.root_type();
            if other != tau {
                return Err(Error::RootTypeMismatch {
                    left: tau.to_string(),
                    right: other.to_string(),
                });
            }
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(rp.clone()).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&rp);
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, k: &Rational, other: &RootedSum) -> Result<()> {
        for (rp, c) in &other.terms {
            self.add_term(k * c, rp.clone())?;
        }
        Ok(())
    }

    pub fn coefficient(&self, rp: &RootedPermutation) -> Rational {
        self.terms.get(rp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RootedPermutation, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn apply_symmetry(&self, s: Symmetry) -> RootedSum {
        let mut out = RootedSum::new();
        for (rp, c) in &self.terms {
            out.add_term(c.clone(), rp.apply_symmetry(s))
                .expect("a symmetry maps a single root type to a single root type");
        }
        out
    }
}

impl fmt::Display for RootedSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (rp, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if mag.is_one() {
                write!(f, "{sign}[{rp}]")?;
            } else {
                write!(f, "{sign}{}[{rp}]", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RootedSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedSum({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct RootedRecord {
    coeff: String,
    perm: String,
    roots: Vec<usize>,
}

impl Serialize for RootedSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms
            .iter()
            .map(|(rp, c)| RootedRecord {
                coeff: format_rational(c),
                perm: rp.base.to_string(),
                roots: rp.roots.clone(),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootedSum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut out = RootedSum::new();
        for r in Vec::<RootedRecord>::deserialize(d)? {
            let c = parse_rational(&r.coeff).map_err(D::Error::custom)?;
            let rp = parse_rooted(&r.perm, &r.roots).map_err(D::Error::custom)?;
            out.add_term(c, rp).map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

/// Calls `f` on every `k`-subset of `items`, in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            if items.len() < need {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(items, k, 0, &mut cur, f);
}

/// All `(π, R)` with `π ∈ S_n` and `R` a copy of `τ`, ordered by `π` then by `R`.
pub fn enumerate_rooted(tau: &Permutation, n: usize) -> Result<Vec<RootedPermutation>> {
    let t = tau.order();
    if n < t || n > 7 {
        return Err(Error::OutOfRange {
            what: "rooted permutation order",
            value: n,
            min: t,
            max: 7,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for pi in enumerate_sn(n)? {
        for_each_subset(&all, t, &mut |pos| {
            if pi.restrict(pos) == *tau {
                out.push(RootedPermutation {
                    base: pi.clone(),
                    roots: pos.iter().map(|p| p + 1).collect(),
                });
            }
        });
    }
    Ok(out)
}

/// `⟦(π, R)⟧ = C(|π|, |R|)⁻¹ π`, extended linearly.
pub fn unroot(rs: &RootedSum) -> FormalSum {
    let mut out = FormalSum::new();
    for (rp, c) in rs.iter() {
        out.add_term(c / binomial_rational(rp.order(), rp.roots.len()), rp.base.clone());
    }
    out
}

/// All products `a × b` for root type `τ` with `|a| = ka`, `|b| = kb`.
#[derive(Debug, Default)]
pub struct ProductTable {
    products: HashMap<(RootedPermutation, RootedPermutation), RootedSum>,
}

impl ProductTable {
    /// One pass over `S_m^τ`, `m = ka + kb - |τ|`: every split of the non-root positions
    /// into parts of sizes `ka - |τ|` and `kb - |τ|` contributes to exactly one product.
    pub fn build(tau: &Permutation, ka: usize, kb: usize) -> Result<Self> {
        let t = tau.order();
        if ka < t || kb < t {
            return Err(Error::OutOfRange {
                what: "flag order",
                value: ka.min(kb),
                min: t,
                max: usize::MAX,
            });
        }
        let m = ka + kb - t;
        let total = BigInt::from(binomial((m - t) as u64, (ka - t) as u64));
        let mut counts: HashMap<(RootedPermutation, RootedPermutation), BTreeMap<RootedPermutation, u64>> =
            HashMap::new();
        for host in enumerate_rooted(tau, m)? {
            let q: Vec<usize> = host.roots.iter().map(|r| r - 1).collect();
            let rest: Vec<usize> = (0..m).filter(|p| !q.contains(p)).collect();
            for_each_subset(&rest, ka - t, &mut |part| {
                let mut pa: Vec<usize> = part.iter().chain(&q).copied().collect();
                pa.sort_unstable();
                let mut pb: Vec<usize> = rest.iter().filter(|p| !part.contains(p)).chain(&q).copied().collect();
                pb.sort_unstable();
                let key = (host.induced(&pa), host.induced(&pb));
                *counts.entry(key).or_default().entry(host.clone()).or_insert(0) += 1;
            });
        }
        let products = counts
            .into_iter()
            .map(|(key, hosts)| {
                let sum = RootedSum {
                    terms: hosts
                        .into_iter()
                        .map(|(h, c)| (h, Rational::new(BigInt::from(c), total.clone())))
                        .collect(),
                };
                (key, sum)
            })
            .collect();
        Ok(ProductTable { products })
    }

    pub fn get(&self, a: &RootedPermutation, b: &RootedPermutation) -> RootedSum {
        self.products
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }
}

type TableKey = (Permutation, usize, usize);

fn table_cache() -> &'static RwLock<HashMap<TableKey, Arc<ProductTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<TableKey, Arc<ProductTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared product table; built once per `(τ, ka, kb)` and safe to use from many threads.
pub fn product_table(tau: &Permutation, ka: usize, kb: usize) -> Result<Arc<ProductTable>> {
    let key = (tau.clone(), ka, kb);
    if let Some(t) = table_cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(t));
    }
    let built = Arc::new(ProductTable::build(tau, ka, kb)?);
    let mut w = table_cache().write().expect("cache lock");
    Ok(Arc::clone(w.entry(key).or_insert(built)))
}

/// The flag product of two rooted permutations with a common root type.
pub fn flag_product(a: &RootedPermutation, b: &RootedPermutation) -> Result<RootedSum> {
    let (ta, tb) = (a.root_type(), b.root_type());
    if ta != tb {
        return Err(Error::RootTypeMismatch {
            left: ta.to_string(),
            right: tb.to_string(),
        });
    }
    Ok(product_table(&ta, a.order(), b.order())?.get(a, b))
}

/// Bilinear extension of [`flag_product`].
pub fn flag_product_sums(a: &RootedSum, b: &RootedSum) -> Result<RootedSum> {
    let mut out = RootedSum::new();
    for (ra, ca) in a.iter() {
        for (rb, cb) in b.iter() {
            out.add_scaled(&(ca * cb), &flag_product(ra, rb)?)?;
        }
    }
    Ok(out)
}

/// Rotates every term by a quarter turn, `(x, y) ↦ (n + 1 - y, x)`, carrying the roots.
pub fn quarter_turn(rs: &RootedSum) -> RootedSum {
    rs.apply_symmetry(Symmetry::QUARTER_TURN)
}

/// Number of `τ`-rooted permutations of order `n`, `Σ_{π ∈ S_n} #(τ, π)`.
pub fn count_rooted(tau: &Permutation, n: usize) -> Result<u128> {
    Ok(enumerate_sn(n)?.iter().map(|pi| count_pattern(tau, pi)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn rp(s: &str) -> RootedPermutation {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn parsing_and_root_types() {
        let x = parse_rooted("1324", &[2, 4]).unwrap();
        assert_eq!(x.root_type(), p("12"));
        assert_eq!(x.to_string(), "1324:r=2,4");
        assert_eq!(rp("1324:r=4,2"), x);
        assert_eq!(parse_rooted("12", &[1]).unwrap().root_type(), p("1"));
        assert_eq!(parse_rooted("2143", &[1, 2]).unwrap().root_type(), p("21"));
        assert!(matches!(parse_rooted("123", &[4]), Err(Error::RootOutOfRange { .. })));
        assert!(parse_rooted("123", &[]).is_err());
        assert!("123:2".parse::<RootedPermutation>().is_err());
    }

    #[test]
    fn enumeration_sizes() {
        let one = enumerate_rooted(&p("1"), 2).unwrap();
        assert_eq!(one, vec![rp("12:r=1"), rp("12:r=2"), rp("21:r=1"), rp("21:r=2")]);
        assert_eq!(enumerate_rooted(&p("12"), 2).unwrap(), vec![rp("12:r=1,2")]);
        assert_eq!(enumerate_rooted(&p("12"), 4).unwrap().len(), 72);
        assert_eq!(count_rooted(&p("12"), 4).unwrap(), 72);
        assert!(enumerate_rooted(&p("12"), 8).is_err());
    }

    #[test]
    fn unrooting() {
        let s = RootedSum::single(int(1), rp("12:r=1"));
        assert_eq!(unroot(&s), FormalSum::single(rat(1, 2), p("12")));
        let s = RootedSum::single(int(1), rp("1324:r=2,4"));
        assert_eq!(unroot(&s), FormalSum::single(rat(1, 6), p("1324")));
        assert!(unroot(&RootedSum::new()).is_empty());
    }

    #[test]
    fn mixed_root_types_rejected() {
        let mut s = RootedSum::single(int(1), rp("12:r=1,2"));
        assert!(matches!(s.add_term(int(1), rp("21:r=1,2")), Err(Error::RootTypeMismatch { .. })));
        assert!(flag_product(&rp("12:r=1,2"), &rp("21:r=1,2")).is_err());
    }

    #[test]
    fn product_example() {
        let a = rp("12:r=1");
        let prod = flag_product(&a, &a).unwrap();
        assert_eq!(prod.len(), 2);
        assert_eq!(prod.coefficient(&rp("123:r=1")), int(1));
        assert_eq!(prod.coefficient(&rp("132:r=1")), int(1));
    }

    /// Brute-force product for one pair, straight from the definition.
    fn naive_product(a: &RootedPermutation, b: &RootedPermutation) -> RootedSum {
        let tau = a.root_type();
        let t = tau.order();
        let m = a.order() + b.order() - t;
        let mut out = RootedSum::new();
        for host in enumerate_rooted(&tau, m).unwrap() {
            let q: Vec<usize> = host.roots().iter().map(|r| r - 1).collect();
            let rest: Vec<usize> = (0..m).filter(|x| !q.contains(x)).collect();
            let (mut good, mut total) = (0i64, 0i64);
            for mask in 0u32..(1 << rest.len()) {
                if mask.count_ones() as usize != a.order() - t {
                    continue;
                }
                total += 1;
                let mut pa: Vec<usize> = q.clone();
                let mut pb: Vec<usize> = q.clone();
                for (i, &x) in rest.iter().enumerate() {
                    if mask >> i & 1 == 1 { pa.push(x) } else { pb.push(x) }
                }
                pa.sort();
                pb.sort();
                if host.induced(&pa) == *a && host.induced(&pb) == *b {
                    good += 1;
                }
            }
            out.add_term(Rational::new(good.into(), total.into()), host).unwrap();
        }
        out
    }

    #[test]
    fn product_table_matches_definition() {
        let tau = p("12");
        let flags = enumerate_rooted(&tau, 3).unwrap();
        for a in &flags {
            for b in flags.iter().step_by(2) {
                assert_eq!(flag_product(a, b).unwrap(), naive_product(a, b), "{a} x {b}");
            }
        }
    }

    #[test]
    fn product_is_symmetric_and_coefficients_partition_unity() {
        let tau = p("21");
        let flags = enumerate_rooted(&tau, 4).unwrap();
        let mut totals: BTreeMap<RootedPermutation, Rational> = BTreeMap::new();
        for a in &flags {
            for b in &flags {
                let ab = flag_product(a, b).unwrap();
                for (h, c) in ab.iter() {
                    assert!(*c > int(0) && *c <= int(1));
                    *totals.entry(h.clone()).or_insert_with(Rational::zero) += c;
                }
                if a <= b {
                    assert_eq!(ab, flag_product(b, a).unwrap());
                }
            }
        }
        assert_eq!(totals.len(), count_rooted(&tau, 6).unwrap() as usize);
        assert!(totals.values().all(|v| v.is_one()));
    }

    #[test]
    fn quarter_turn_properties() {
        let x = RootedSum::single(int(1), rp("1234:r=1,3"));
        let y = quarter_turn(&x);
        assert_eq!(y.root_type(), Some(p("21")));
        let mut z = y.clone();
        for _ in 0..3 {
            z = quarter_turn(&z);
        }
        assert_eq!(z, x);
        assert!(quarter_turn(&RootedSum::new()).is_empty());
        let a = rp("132:r=1,3");
        let b = rp("213:r=2,3");
        let qa = RootedSum::single(int(1), a.apply_symmetry(Symmetry::QUARTER_TURN));
        let qb = RootedSum::single(int(1), b.apply_symmetry(Symmetry::QUARTER_TURN));
        assert_eq!(
            quarter_turn(&flag_product(&a, &b).unwrap()),
            flag_product_sums(&qa, &qb).unwrap()
        );
    }

    #[test]
    fn json_roundtrip() {
        let mut s = RootedSum::single(int(1), rp("1234:r=1,3"));
        s.add_term(int(-1), rp("1432:r=1,3")).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"[{"coeff":"1","perm":"1234","roots":[1,3]},{"coeff":"-1","perm":"1432","roots":[1,3]}]"#
        );
        assert_eq!(serde_json::from_str::<RootedSum>(&json).unwrap(), s);
    }
}
