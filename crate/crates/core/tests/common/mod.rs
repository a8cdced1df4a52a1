//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

/// Memoized edit-distance recursion over suffixes.
pub fn levenshtein_oracle(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let key = (a.len(), b.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert(key, v);
        v
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, &mut HashMap::new())
}

/// A partition as a set of sorted blocks.
pub type Partition = BTreeSet<Vec<usize>>;

pub fn partition_from_labels(labels: &[usize]) -> Partition {
    let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        blocks.entry(l).or_default().push(i);
    }
    blocks.into_values().collect()
}

/// Every partition reachable by an exemplar set and assignment that
/// maximizes `sum_i s(i, e(i))`, where an exemplar contributes the
/// preference `s(e, e)`. Ties in either the subset or the assignment are
/// all reported.
pub fn brute_force_optimal_partitions(tokens: &[&str]) -> (i64, BTreeSet<Partition>) {
    let n = tokens.len();
    assert!((1..=12).contains(&n));
    let mut s = vec![vec![0i64; n]; n];
    let mut min_off = i64::MAX;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s[i][j] = -(levenshtein_oracle(tokens[i], tokens[j]) as i64);
                min_off = min_off.min(s[i][j]);
            }
        }
    }
    let pref = if n == 1 { 0 } else { min_off };
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = pref;
    }

    let mut best = i64::MIN;
    let mut optimal = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let exemplars: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let mut total = 0;
        // per point, all equally good exemplar choices
        let mut choices: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, row) in s.iter().enumerate() {
            if mask & (1 << i) != 0 {
                total += pref;
                choices.push(vec![i]);
                continue;
            }
            let top = exemplars.iter().map(|&e| row[e]).max().unwrap();
            total += top;
            choices.push(exemplars.iter().copied().filter(|&e| row[e] == top).collect());
        }
        if total < best {
            continue;
        }
        if total > best {
            best = total;
            optimal.clear();
        }
        let mut labels = vec![0; n];
        expand(&choices, 0, &mut labels, &mut optimal);
    }
    (best, optimal)
}

fn expand(choices: &[Vec<usize>], i: usize, labels: &mut Vec<usize>, out: &mut BTreeSet<Partition>) {
    if i == choices.len() {
        out.insert(partition_from_labels(labels));
        return;
    }
    for &c in &choices[i] {
        labels[i] = c;
        expand(choices, i + 1, labels, out);
    }
}

const ALPHABETS: [&[u8]; 4] = [b"abcdef", b"ghijkl", b"mnopqr", b"stuvwx"];

/// Random instance of `n <= 8` tokens in groups whose cross-group distances
/// are at least three times the largest in-group distance.
pub fn well_separated_instance<R: Rng>(rng: &mut R) -> Vec<String> {
    loop {
        let groups = rng.gen_range(1..=4);
        let mut tokens = Vec::new();
        let mut alphabets = ALPHABETS.to_vec();
        alphabets.shuffle(rng);
        for alphabet in alphabets.iter().take(groups) {
            let len = rng.gen_range(6..=8);
            let base: Vec<u8> = (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect();
            let size = rng.gen_range(1..=3);
            let mut members: Vec<Vec<u8>> = vec![base.clone()];
            while members.len() < size {
                let mut v = base.clone();
                let pos = rng.gen_range(0..v.len());
                v[pos] = *alphabet.choose(rng).unwrap();
                if !members.contains(&v) {
                    members.push(v);
                }
            }
            tokens.extend(members.into_iter().map(|m| String::from_utf8(m).unwrap()));
        }
        if tokens.len() < 2 || tokens.len() > 8 {
            continue;
        }
        let mut uniq = tokens.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != tokens.len() {
            continue;
        }
        if separation_holds(&tokens) {
            return tokens;
        }
    }
}

fn separation_holds(tokens: &[String]) -> bool {
    // Groups are identified by their (disjoint) alphabets.
    let group_of = |t: &str| {
        ALPHABETS
            .iter()
            .position(|a| a.contains(&t.as_bytes()[0]))
            .unwrap()
    };
    let mut max_in = 0;
    let mut min_cross = usize::MAX;
    for (i, a) in tokens.iter().enumerate() {
        for b in &tokens[i + 1..] {
            let d = levenshtein_oracle(a, b);
            if group_of(a) == group_of(b) {
                max_in = max_in.max(d);
            } else {
                min_cross = min_cross.min(d);
            }
        }
    }
    min_cross == usize::MAX || min_cross >= 3 * max_in.max(1)
}

/// Pair-count form of the Hubert-Arabie index, computed by enumerating
/// every unordered pair.
pub fn ari_by_pair_enumeration(predicted: &[usize], truth: &[usize]) -> f64 {
    let n = predicted.len();
    let (mut tp, mut fp, mut fn_, mut tn) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (predicted[i] == predicted[j], truth[i] == truth[j]) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                (false, false) => tn += 1.0,
            }
        }
    }
    let denom = (tp + fn_) * (fn_ + tn) + (tp + fp) * (fp + tn);
    if denom == 0.0 {
        return if predicted_equals(predicted, truth) { 1.0 } else { 0.0 };
    }
    2.0 * (tp * tn - fn_ * fp) / denom
}

fn predicted_equals(a: &[usize], b: &[usize]) -> bool {
    partition_from_labels(a) == partition_from_labels(b)
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn all_set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max {
            cur.push(l);
            go(i + 1, n, max.max(l + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Every string over `alphabet` of length at most `max_len`, shortest first.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.len());
        for s in &frontier {
            for &c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Edit distances between all pairs of a suffix-closed string set, by the
/// same recursion as [`levenshtein_oracle`] with one memo shared by every
/// pair. `get(i, j)` is the distance between `strings[i]` and `strings[j]`.
pub struct LevenshteinTable {
    n: usize,
    tail: Vec<usize>,
    head: Vec<Option<char>>,
    memo: Vec<u8>,
}

const UNSET: u8 = u8::MAX;

impl LevenshteinTable {
    pub fn new(strings: &[String]) -> Self {
        let index: HashMap<&str, usize> = strings.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let tail = strings
            .iter()
            .map(|s| {
                let rest = s.char_indices().nth(1).map_or("", |(p, _)| &s[p..]);
                *index.get(rest).expect("string set must be closed under suffixes")
            })
            .collect();
        let head = strings.iter().map(|s| s.chars().next()).collect();
        let n = strings.len();
        Self {
            n,
            tail,
            head,
            memo: vec![UNSET; n * n],
        }
    }

    pub fn get(&mut self, i: usize, j: usize) -> usize {
        let cached = self.memo[i * self.n + j];
        if cached != UNSET {
            return cached as usize;
        }
        let v = match (self.head[i], self.head[j]) {
            (None, None) => 0,
            (None, Some(_)) => 1 + self.get(i, self.tail[j]),
            (Some(_), None) => 1 + self.get(self.tail[i], j),
            (Some(x), Some(y)) if x == y => self.get(self.tail[i], self.tail[j]),
            _ => {
                1 + self
                    .get(self.tail[i], j)
                    .min(self.get(i, self.tail[j]))
                    .min(self.get(self.tail[i], self.tail[j]))
            }
        };
        self.memo[i * self.n + j] = v as u8;
        v
    }
}
