//! Set partitions, noncrossing partitions and pairings, and the
//! moment/cumulant conversions built on them.
//!
//! Partitions are over `1..=n`. Internally a partition is its restricted
//! growth string: element `i` carries the index of its block, blocks being
//! numbered in order of their minima.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub const MAX_NC_N: usize = 16;
pub const MAX_PAIRING_N: usize = 24;
pub const MAX_RECT_ORDER: usize = 8;
pub const MAX_CLASSICAL_ORDER: usize = 10;
pub const MAX_MP_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    labels: Vec<u8>,
    num_blocks: usize,
}

impl SetPartition {
    /// Build from a restricted growth string (`labels[0] == 0`, each label at
    /// most one more than the running maximum).
    pub fn from_labels(labels: Vec<u8>) -> Result<Self> {
        let mut next = 0u8;
        for &l in &labels {
            if l > next {
                return Err(Error::InvalidArgument(format!("{labels:?} is not a restricted growth string")));
            }
            if l == next {
                next += 1;
            }
        }
        Ok(Self { num_blocks: next as usize, labels })
    }

    /// Build from blocks of 1-based elements in any order.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            for &x in block {
                if x == 0 || x > n {
                    return Err(Error::InvalidArgument(format!("element {x} outside 1..={n}")));
                }
                if owner[x - 1] != usize::MAX {
                    return Err(Error::InvalidArgument(format!("element {x} appears twice")));
                }
                owner[x - 1] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidArgument(format!("element {} is not covered", i + 1)));
        }
        Ok(Self::relabel(&owner))
    }

    /// Canonical relabelling of an arbitrary block assignment.
    fn relabel(owner: &[usize]) -> Self {
        let mut map: Vec<(usize, u8)> = Vec::new();
        let mut labels = Vec::with_capacity(owner.len());
        for &o in owner {
            let l = match map.iter().find(|m| m.0 == o) {
                Some(m) => m.1,
                None => {
                    let l = map.len() as u8;
                    map.push((o, l));
                    l
                }
            };
            labels.push(l);
        }
        Self { num_blocks: map.len(), labels }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Blocks as sorted 1-based lists, ordered by minimum.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_blocks];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Block minima in increasing order.
    pub fn minima(&self) -> Vec<usize> {
        let mut seen = 0usize;
        let mut out = Vec::with_capacity(self.num_blocks);
        for (i, &l) in self.labels.iter().enumerate() {
            if l as usize == seen {
                out.push(i + 1);
                seen += 1;
            }
        }
        out
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_noncrossing(&self) -> bool {
        // scan with a stack of open blocks; revisiting a block that is not on
        // top of the open ones after closing them is a crossing
        let mut last = vec![0usize; self.num_blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            last[l as usize] = i;
        }
        let mut stack: Vec<u8> = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            match stack.iter().position(|&b| b == l) {
                Some(p) => {
                    if p + 1 != stack.len() {
                        return false;
                    }
                }
                None => stack.push(l),
            }
            if last[l as usize] == i {
                stack.pop();
            }
        }
        true
    }
}

impl Ord for SetPartition {
    /// Lexicographic on the sequence of block minima, then on block contents.
    fn cmp(&self, other: &Self) -> Ordering {
        self.minima()
            .cmp(&other.minima())
            .then_with(|| self.blocks().cmp(&other.blocks()))
    }
}

impl PartialOrd for SetPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SetPartition {
    /// `{1 4}{2 3}`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.blocks() {
            write!(f, "{{")?;
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCPartition(SetPartition);

impl NCPartition {
    pub fn new(p: SetPartition) -> Result<Self> {
        if !p.is_noncrossing() {
            return Err(Error::InvalidArgument(format!("{p} is crossing")));
        }
        Ok(Self(p))
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        Self::new(SetPartition::from_blocks(n, blocks)?)
    }

    pub fn partition(&self) -> &SetPartition {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn num_blocks(&self) -> usize {
        self.0.num_blocks()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.0.blocks()
    }

    /// `(e, o)`: numbers of blocks with even and with odd minimum.
    pub fn min_parity_stats(&self) -> (usize, usize) {
        let minima = self.0.minima();
        let e = minima.iter().filter(|m| *m % 2 == 0).count();
        (e, minima.len() - e)
    }

    /// The pairing of `1..=2n` assigned to this partition of `1..=n`, with
    /// `y_i = 2i - 1` and `z_i = 2i`: a block `v_1 < … < v_m` gives the pairs
    /// `{y_{v_1}, z_{v_m}}` and `{z_{v_j}, y_{v_{j+1}}}`.
    pub fn to_pairing(&self) -> NCPairing {
        let n = self.n();
        let mut owner = vec![0usize; 2 * n];
        let mut next = 0;
        for block in self.blocks() {
            let m = block.len();
            let (y, z) = (|i: usize| 2 * i - 2, |i: usize| 2 * i - 1);
            owner[y(block[0])] = next;
            owner[z(block[m - 1])] = next;
            next += 1;
            for j in 0..m - 1 {
                owner[z(block[j])] = next;
                owner[y(block[j + 1])] = next;
                next += 1;
            }
        }
        NCPairing(NCPartition(SetPartition::relabel(&owner)))
    }
}

impl fmt::Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCPairing(NCPartition);

impl NCPairing {
    pub fn new(p: NCPartition) -> Result<Self> {
        if p.0.block_sizes().iter().any(|&s| s != 2) {
            return Err(Error::InvalidArgument(format!("{p} is not a pairing")));
        }
        Ok(Self(p))
    }

    pub fn as_partition(&self) -> &NCPartition {
        &self.0
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.0.blocks().into_iter().map(|b| (b[0], b[1])).collect()
    }

    pub fn min_parity_stats(&self) -> (usize, usize) {
        self.0.min_parity_stats()
    }

    /// Inverse of [`NCPartition::to_pairing`]: `i` and `j` share a block when
    /// some pair joins one of `y_i, z_i` to one of `y_j, z_j`.
    pub fn to_partition(&self) -> NCPartition {
        let n = self.0.n() / 2;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (p, q) in self.pairs() {
            let (a, b) = (find(&mut parent, (p - 1) / 2), find(&mut parent, (q - 1) / 2));
            parent[a.max(b)] = a.min(b);
        }
        let owner: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        NCPartition(SetPartition::relabel(&owner))
    }
}

impl fmt::Display for NCPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Visit every noncrossing partition of `1..=n` whose blocks have size at
/// most `max_block` and satisfy `size_ok`, in generation order.
///
/// Elements are placed left to right. Joining an open block closes every
/// block opened after it, so each choice keeps the partition noncrossing.
fn generate_nc<F, V>(n: usize, max_block: usize, size_ok: F, visit: &mut V)
where
    F: Fn(usize) -> bool,
    V: FnMut(&[u8]),
{
    struct State {
        labels: Vec<u8>,
        sizes: Vec<usize>,
        stack: Vec<u8>,
    }

    fn rec<F: Fn(usize) -> bool, V: FnMut(&[u8])>(
        st: &mut State,
        n: usize,
        max_block: usize,
        size_ok: &F,
        visit: &mut V,
    ) {
        let i = st.labels.len();
        if i == n {
            if st.stack.iter().all(|&b| size_ok(st.sizes[b as usize])) {
                visit(&st.labels);
            }
            return;
        }
        // the open blocks still need room for their remaining elements
        let pending: usize = st
            .stack
            .iter()
            .map(|&b| usize::from(!size_ok(st.sizes[b as usize])))
            .sum();
        if pending > n - i {
            return;
        }
        // join an open block; blocks above it in the stack close
        for p in (0..st.stack.len()).rev() {
            let b = st.stack[p];
            if st.sizes[b as usize] >= max_block {
                continue;
            }
            if !st.stack[p + 1..].iter().all(|&c| size_ok(st.sizes[c as usize])) {
                // closing a block of forbidden size; deeper choices close more
                break;
            }
            let saved: Vec<u8> = st.stack.split_off(p + 1);
            st.labels.push(b);
            st.sizes[b as usize] += 1;
            rec(st, n, max_block, size_ok, visit);
            st.sizes[b as usize] -= 1;
            st.labels.pop();
            st.stack.extend(saved);
        }
        // open a new block
        let b = st.sizes.len() as u8;
        st.labels.push(b);
        st.sizes.push(1);
        st.stack.push(b);
        rec(st, n, max_block, size_ok, visit);
        st.stack.pop();
        st.sizes.pop();
        st.labels.pop();
    }

    let mut st = State { labels: Vec::with_capacity(n), sizes: Vec::new(), stack: Vec::new() };
    rec(&mut st, n, max_block, &size_ok, visit);
}

fn collect_sorted(n: usize, max_block: usize, size_ok: impl Fn(usize) -> bool) -> Vec<NCPartition> {
    let mut out = Vec::new();
    generate_nc(n, max_block, size_ok, &mut |labels| {
        out.push(NCPartition(SetPartition::from_labels(labels.to_vec()).expect("generator emits growth strings")));
    });
    out.sort();
    out
}

fn check_range(n: usize, max: usize, what: &str) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::InvalidArgument(format!("{what}: n must be in 1..={max}, got {n}")));
    }
    Ok(())
}

fn check_even(n: usize, what: &str) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("{what}: n must be even, got {n}")));
    }
    Ok(())
}

/// All noncrossing partitions of `1..=n` in canonical order. `n = 16` holds
/// 35 million partitions; prefer [`for_each_nc`] at that size.
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    check_range(n, MAX_NC_N, "enumerate_nc")?;
    Ok(collect_sorted(n, n, |_| true))
}

/// Stream the noncrossing partitions of `1..=n` as growth strings, without
/// sorting or storing them.
pub fn for_each_nc(n: usize, mut visit: impl FnMut(&[u8])) -> Result<()> {
    check_range(n, MAX_NC_N, "for_each_nc")?;
    generate_nc(n, n, |_| true, &mut visit);
    Ok(())
}

/// Noncrossing partitions of `1..=n` all of whose blocks have even size.
pub fn enumerate_nc_even(n: usize) -> Result<Vec<NCPartition>> {
    check_range(n, MAX_NC_N, "enumerate_nc_even")?;
    check_even(n, "enumerate_nc_even")?;
    Ok(collect_sorted(n, n, |s| s % 2 == 0))
}

/// Noncrossing pairings of `1..=n`.
pub fn enumerate_nc_pairings(n: usize) -> Result<Vec<NCPairing>> {
    check_range(n, MAX_PAIRING_N, "enumerate_nc_pairings")?;
    check_even(n, "enumerate_nc_pairings")?;
    Ok(collect_sorted(n, 2, |s| s == 2).into_iter().map(NCPairing).collect())
}

pub fn min_parity_stats(p: &NCPartition) -> (usize, usize) {
    p.min_parity_stats()
}

pub fn nc_to_pairing(p: &NCPartition) -> NCPairing {
    p.to_pairing()
}

/// Visit every set partition of `1..=n` as a growth string.
fn for_each_set_partition(n: usize, visit: &mut impl FnMut(&[u8])) {
    fn rec(labels: &mut Vec<u8>, max: u8, n: usize, visit: &mut impl FnMut(&[u8])) {
        if labels.len() == n {
            visit(labels);
            return;
        }
        for l in 0..=max {
            labels.push(l);
            rec(labels, max.max(l + 1), n, visit);
            labels.pop();
        }
    }
    if n == 0 {
        return;
    }
    let mut labels = vec![0u8];
    rec(&mut labels, 1, n, visit);
}

/// Every set partition of `1..=n`, in generation order.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_range(n, MAX_CLASSICAL_ORDER, "enumerate_set_partitions")?;
    let mut out = Vec::new();
    for_each_set_partition(n, &mut |l| out.push(SetPartition::from_labels(l.to_vec()).unwrap()));
    Ok(out)
}

fn block_sizes_of(labels: &[u8], sizes: &mut Vec<usize>) {
    sizes.clear();
    for &l in labels {
        if l as usize == sizes.len() {
            sizes.push(0);
        }
        sizes[l as usize] += 1;
    }
}

/// Compensated summation; the conversions add thousands of terms of mixed sign.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ_{π ∈ NC'(2n)} λ^{e(π)} Π_V c_{|V|}` for one `n`, skipping the one-block
/// partition when `skip_full` is set.
fn rect_moment_sum(lambda: f64, c: &[f64], n: usize, skip_full: bool) -> f64 {
    let mut total = Neumaier::default();
    let mut sizes = Vec::new();
    generate_nc(2 * n, 2 * n, |s| s % 2 == 0, &mut |labels: &[u8]| {
        block_sizes_of(labels, &mut sizes);
        if skip_full && sizes.len() == 1 {
            return;
        }
        let mut term = 1.0;
        let mut even_minima = 0;
        let mut seen = 0u8;
        for (i, &l) in labels.iter().enumerate() {
            if l == seen {
                seen += 1;
                if (i + 1) % 2 == 0 {
                    even_minima += 1;
                }
            }
        }
        for &s in &sizes {
            term *= c[s / 2 - 1];
        }
        total.add(term * lambda.powi(even_minima));
    });
    total.value()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// `(m_2, …, m_{2K})` from the rectangular cumulants `(c_2, …, c_{2K})`.
pub fn moments_from_rect_cumulants(lambda: f64, c: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if c.len() > MAX_RECT_ORDER {
        return Err(Error::InvalidArgument(format!("at most {MAX_RECT_ORDER} cumulants, got {}", c.len())));
    }
    Ok((1..=c.len()).map(|n| rect_moment_sum(lambda, c, n, false)).collect())
}

/// Inverse of [`moments_from_rect_cumulants`]. The one-block partition is
/// the only term containing `c_{2n}`, with coefficient 1.
pub fn rect_cumulants_from_moments(lambda: f64, m: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if m.len() > MAX_RECT_ORDER {
        return Err(Error::InvalidArgument(format!("at most {MAX_RECT_ORDER} moments, got {}", m.len())));
    }
    let mut c = vec![0.0; m.len()];
    for n in 1..=m.len() {
        c[n - 1] = m[n - 1] - rect_moment_sum(lambda, &c, n, true);
    }
    Ok(c)
}

fn classical_sum(cstar: &[f64], k: usize, skip_full: bool) -> f64 {
    let mut total = Neumaier::default();
    let mut sizes = Vec::new();
    for_each_set_partition(k, &mut |labels: &[u8]| {
        block_sizes_of(labels, &mut sizes);
        if skip_full && sizes.len() == 1 {
            return;
        }
        total.add(sizes.iter().map(|&s| cstar[s - 1]).product::<f64>());
    });
    total.value()
}

/// `(m_1, …, m_K)` from the classical cumulants `(c*_1, …, c*_K)`.
pub fn classical_moments_from_cumulants(cstar: &[f64]) -> Result<Vec<f64>> {
    if cstar.len() > MAX_CLASSICAL_ORDER {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_CLASSICAL_ORDER} cumulants, got {}",
            cstar.len()
        )));
    }
    Ok((1..=cstar.len()).map(|k| classical_sum(cstar, k, false)).collect())
}

pub fn classical_cumulants_from_moments(m: &[f64]) -> Result<Vec<f64>> {
    if m.len() > MAX_CLASSICAL_ORDER {
        return Err(Error::InvalidArgument(format!("at most {MAX_CLASSICAL_ORDER} moments, got {}", m.len())));
    }
    let mut c = vec![0.0; m.len()];
    for k in 1..=m.len() {
        c[k - 1] = m[k - 1] - classical_sum(&c, k, true);
    }
    Ok(c)
}

/// `(m_1, …, m_K)` from free cumulants `(κ_1, …, κ_K)`:
/// `m_n = Σ_{π ∈ NC(n)} Π_V κ_{|V|}`.
pub fn free_moments_from_cumulants(kappa: &[f64]) -> Result<Vec<f64>> {
    if kappa.len() > MAX_NC_N {
        return Err(Error::InvalidArgument(format!("at most {MAX_NC_N} cumulants, got {}", kappa.len())));
    }
    let mut out = Vec::with_capacity(kappa.len());
    let mut sizes = Vec::new();
    for n in 1..=kappa.len() {
        let mut total = 0.0;
        generate_nc(n, n, |_| true, &mut |labels: &[u8]| {
            block_sizes_of(labels, &mut sizes);
            total += sizes.iter().map(|&s| kappa[s - 1]).product::<f64>();
        });
        out.push(total);
    }
    Ok(out)
}

/// Coefficients of `Σ_π a^{o(π)}` over noncrossing pairings of `1..=2n`:
/// entry `j` counts pairings with `o(π) = j`.
pub fn mp_moment_polynomial(n: usize) -> Result<Vec<u64>> {
    check_range(n, MAX_MP_ORDER, "mp_moment")?;
    let mut counts = vec![0u64; n + 1];
    generate_nc(2 * n, 2, |s| s == 2, &mut |labels: &[u8]| {
        let mut seen = 0u8;
        let mut odd = 0;
        for (i, &l) in labels.iter().enumerate() {
            if l == seen {
                seen += 1;
                if i % 2 == 0 {
                    odd += 1;
                }
            }
        }
        counts[odd] += 1;
    });
    Ok(counts)
}

/// `Σ_π a^{o(π)}` over noncrossing pairings of `1..=2n`: the `n`-th moment of
/// the Marchenko-Pastur law with parameter `a`.
pub fn mp_moment(a: f64, n: usize) -> Result<f64> {
    let counts = mp_moment_polynomial(n)?;
    // Horner from the top coefficient
    Ok(counts.iter().rev().fold(0.0, |acc, &k| acc * a + k as f64))
}

/// CSV rows `n,partition-id,blocks,e,o` for a list of partitions.
pub fn partitions_csv<'a>(n: usize, parts: impl IntoIterator<Item = &'a NCPartition>) -> String {
    let mut out = String::from("n,partition-id,blocks,e,o\n");
    for (id, p) in parts.into_iter().enumerate() {
        let (e, o) = p.min_parity_stats();
        out.push_str(&format!("{n},{id},{p},{e},{o}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalan(n: u64) -> u64 {
        (0..n).fold(1u64, |c, k| c * 2 * (2 * k + 1) / (k + 2))
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_nc(1).unwrap().len(), 1);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert_eq!(enumerate_nc_even(2).unwrap().len(), 1);
        assert_eq!(enumerate_nc_even(4).unwrap().len(), 3);
        assert_eq!(enumerate_nc_even(6).unwrap().len(), 12);
        assert_eq!(enumerate_nc_pairings(2).unwrap().len(), 1);
        assert_eq!(enumerate_nc_pairings(4).unwrap().len(), 2);
        assert_eq!(enumerate_nc_pairings(6).unwrap().len(), 5);
    }

    #[test]
    fn counts_match_closed_forms() {
        for n in 1..=10 {
            assert_eq!(enumerate_nc(n).unwrap().len() as u64, catalan(n as u64));
            assert_eq!(enumerate_nc_pairings(2 * n).unwrap().len() as u64, catalan(n as u64));
        }
        for n in 1..=8u64 {
            let expected = binomial(3 * n, n) / (2 * n + 1);
            assert_eq!(enumerate_nc_even(2 * n as usize).unwrap().len() as u64, expected);
        }
    }

    #[test]
    fn generated_sets_equal_brute_force_filters() {
        for n in 1..=7 {
            let mut brute: Vec<NCPartition> = enumerate_set_partitions(n)
                .unwrap()
                .into_iter()
                .filter(|p| crossing_by_definition(p).is_none())
                .map(NCPartition)
                .collect();
            brute.sort();
            assert_eq!(enumerate_nc(n).unwrap(), brute);
            if n % 2 == 0 {
                let even: Vec<_> = brute
                    .iter()
                    .filter(|p| p.0.block_sizes().iter().all(|s| s % 2 == 0))
                    .cloned()
                    .collect();
                assert_eq!(enumerate_nc_even(n).unwrap(), even);
            }
        }
    }

    /// Quadruple test straight from the definition.
    fn crossing_by_definition(p: &SetPartition) -> Option<(usize, usize, usize, usize)> {
        let l = p.labels();
        let n = l.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        if l[a] == l[c] && l[b] == l[d] && l[a] != l[b] {
                            return Some((a, b, c, d));
                        }
                    }
                }
            }
        }
        None
    }

    #[test]
    fn the_only_crossing_partition_of_four() {
        let crossing: Vec<_> = enumerate_set_partitions(4)
            .unwrap()
            .into_iter()
            .filter(|p| !p.is_noncrossing())
            .collect();
        assert_eq!(crossing.len(), 1);
        assert_eq!(crossing[0].blocks(), vec![vec![1, 3], vec![2, 4]]);
    }

    #[test]
    fn canonical_order_of_three() {
        let got: Vec<String> = enumerate_nc(3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["{1 2 3}", "{1}{2 3}", "{1 3}{2}", "{1}{2}{3}", "{1 2}{3}"]);
    }

    #[test]
    fn even_partitions_of_four() {
        let got: Vec<String> = enumerate_nc_even(4).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["{1 2 3 4}", "{1 4}{2 3}", "{1 2}{3 4}"]);
        assert!(enumerate_nc_even(3).is_err());
        assert!(enumerate_nc(17).is_err());
        assert!(enumerate_nc(0).is_err());
    }

    #[test]
    fn parity_statistics() {
        let p = NCPartition::from_blocks(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(p.min_parity_stats(), (0, 2));
        let p = NCPartition::from_blocks(4, &[vec![1, 4], vec![2, 3]]).unwrap();
        assert_eq!(p.min_parity_stats(), (1, 1));
        let p = NCPartition::from_blocks(6, &[vec![1, 2, 3, 4, 5, 6]]).unwrap();
        assert_eq!(p.min_parity_stats(), (0, 1));
        assert!(NCPartition::from_blocks(4, &[vec![1, 3], vec![2, 4]]).is_err());
    }

    #[test]
    fn bijection_examples() {
        let one = NCPartition::from_blocks(2, &[vec![1, 2]]).unwrap();
        assert_eq!(one.to_pairing().pairs(), vec![(1, 4), (2, 3)]);
        let two = NCPartition::from_blocks(2, &[vec![1], vec![2]]).unwrap();
        assert_eq!(two.to_pairing().pairs(), vec![(1, 2), (3, 4)]);
    }

    /// The construction by repeatedly removing a block that is an interval
    /// of the remaining elements.
    fn pairing_by_peeling(p: &NCPartition) -> Vec<(usize, usize)> {
        let mut remaining: Vec<usize> = (1..=p.n()).collect();
        let mut blocks = p.blocks();
        let mut pairs = Vec::new();
        while !blocks.is_empty() {
            let idx = blocks
                .iter()
                .position(|b| {
                    let start = remaining.iter().position(|&x| x == b[0]).unwrap();
                    remaining[start..start + b.len()] == b[..]
                })
                .expect("a noncrossing partition always has an interval block");
            let b = blocks.remove(idx);
            let (k, l) = (b[0], b[b.len() - 1]);
            pairs.push((2 * k - 1, 2 * l));
            for w in b.windows(2) {
                pairs.push((2 * w[0], 2 * w[1] - 1));
            }
            remaining.retain(|x| !b.contains(x));
        }
        pairs.sort();
        pairs
    }

    #[test]
    fn bijection_is_onto_pairings_with_odd_statistic() {
        for n in 1..=7 {
            let parts = enumerate_nc(n).unwrap();
            let mut images: Vec<NCPairing> = parts.iter().map(|p| p.to_pairing()).collect();
            for (p, img) in parts.iter().zip(&images) {
                assert_eq!(img.min_parity_stats().1, p.num_blocks());
                assert_eq!(&img.to_partition(), p);
                assert_eq!(img.pairs(), pairing_by_peeling(p));
                assert!(img.as_partition().partition().is_noncrossing());
            }
            images.sort();
            images.dedup();
            assert_eq!(images, enumerate_nc_pairings(2 * n).unwrap());
        }
    }

    #[test]
    fn rect_moments_of_gaussian_cumulants() {
        for lambda in [0.0, 0.3, 0.5, 1.0] {
            let m = moments_from_rect_cumulants(lambda, &[1.0, 0.0, 0.0]).unwrap();
            assert_eq!(m[0], 1.0);
            assert!((m[1] - (1.0 + lambda)).abs() < 1e-15);
            assert!((m[2] - (1.0 + 3.0 * lambda + lambda * lambda)).abs() < 1e-15);
        }
        let m = moments_from_rect_cumulants(0.0, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(m.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn rect_moments_of_poisson_cumulants() {
        let (c, lambda) = (0.7, 0.4);
        let m = moments_from_rect_cumulants(lambda, &[c, c]).unwrap();
        assert!((m[0] - c).abs() < 1e-15);
        assert!((m[1] - (c + (1.0 + lambda) * c * c)).abs() < 1e-15);
        let back = rect_cumulants_from_moments(lambda, &m).unwrap();
        assert!((back[0] - c).abs() < 1e-15 && (back[1] - c).abs() < 1e-15);
        assert_eq!(rect_cumulants_from_moments(0.5, &[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn lambda_one_is_free_relation_on_doubled_index() {
        for a in [0.5, 1.0, 2.0] {
            let rect = moments_from_rect_cumulants(1.0, &[a; 5]).unwrap();
            let free = free_moments_from_cumulants(&[0.0, a, 0.0, a, 0.0, a, 0.0, a, 0.0, a]).unwrap();
            for n in 1..=5 {
                assert!((rect[n - 1] - free[2 * n - 1]).abs() < 1e-12 * free[2 * n - 1]);
            }
        }
    }

    #[test]
    fn rect_gaussian_against_free_counting() {
        // λ^n Σ_{NC(n)} (1/λ)^{|π|}
        for lambda in [0.3f64, 0.5, 1.0] {
            let m = moments_from_rect_cumulants(lambda, &[1.0, 0.0, 0.0, 0.0]).unwrap();
            for n in 1..=4 {
                let s: f64 = enumerate_nc(n)
                    .unwrap()
                    .iter()
                    .map(|p| lambda.powi(n as i32 - p.num_blocks() as i32))
                    .sum();
                assert!((m[n - 1] - s).abs() < 1e-14, "λ={lambda} n={n}");
            }
        }
    }

    #[test]
    fn classical_conversions() {
        let m = classical_moments_from_cumulants(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 0.0, 3.0]);
        let c = 0.6;
        let m = classical_moments_from_cumulants(&[0.0, c, 0.0, c]).unwrap();
        assert!((m[3] - (c + 3.0 * c * c)).abs() < 1e-15);
        assert_eq!(classical_moments_from_cumulants(&[0.0; 5]).unwrap(), vec![0.0; 5]);
        assert_eq!(enumerate_set_partitions(10).unwrap().len(), 115_975);
    }

    #[test]
    fn mp_moments() {
        assert_eq!(mp_moment(2.5, 1).unwrap(), 2.5);
        assert_eq!(mp_moment(2.5, 2).unwrap(), 2.5 + 6.25);
        assert_eq!(mp_moment(1.0, 3).unwrap(), 5.0);
        for a in [0.5, 1.0, 2.0] {
            for n in 1..=8 {
                let s: f64 = enumerate_nc(n).unwrap().iter().map(|p| f64::powi(a, p.num_blocks() as i32)).sum();
                assert_eq!(mp_moment(a, n).unwrap(), s);
            }
        }
    }

    #[test]
    fn csv_rows() {
        let csv = partitions_csv(4, &enumerate_nc_even(4).unwrap());
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains("4,1,{1 4}{2 3},1,1"));
    }

    proptest! {
        #[test]
        fn rect_round_trip(c in proptest::collection::vec(-1.0f64..1.0, 6), li in 0usize..3) {
            let lambda = [0.0, 0.3, 1.0][li];
            let m = moments_from_rect_cumulants(lambda, &c).unwrap();
            let back = rect_cumulants_from_moments(lambda, &m).unwrap();
            for (x, y) in c.iter().zip(&back) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn classical_round_trip(c in proptest::collection::vec(-1.0f64..1.0, 7)) {
            let m = classical_moments_from_cumulants(&c).unwrap();
            let back = classical_cumulants_from_moments(&m).unwrap();
            for (x, y) in c.iter().zip(&back) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
