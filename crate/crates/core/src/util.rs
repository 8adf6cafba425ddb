//! Small shared helpers: stable hashing, a seedable PRNG, line slicing, and
//! budget-unit arithmetic. Everything here must be deterministic across
//! platforms and releases, so no `std::collections::hash_map::DefaultHasher`.

/// FNV-1a 64-bit hash. Stable across platforms; used for seeding, feature
/// hashing, and corpus fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// SplitMix64: tiny, fast, and fully reproducible from a seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in `0..bound` (bound > 0).
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}

/// Lines of `text` with their trailing newline kept, so concatenating any
/// contiguous run of them reproduces the original slice byte for byte.
/// The empty string has zero lines.
pub fn inclusive_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

/// The last `n` lines of `text` (newline-inclusive split).
pub fn tail_lines(text: &str, n: usize) -> String {
    let lines = inclusive_lines(text);
    let start = lines.len().saturating_sub(n);
    lines[start..].concat()
}

/// The first `n` lines of `text` (newline-inclusive split).
pub fn head_lines(text: &str, n: usize) -> String {
    let lines = inclusive_lines(text);
    lines[..n.min(lines.len())].concat()
}

/// Budget units for a string: 1 unit covers 4 characters, rounded up.
pub fn budget_units(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Run `f` over `items` on a bounded pool of OS threads; results come back
/// in input order, so callers stay deterministic regardless of scheduling.
pub fn parallel_map<T, R, F>(items: &[T], max_workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = max_workers.min(items.len()).max(1);
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut indexed: Vec<(usize, R)> = std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut idx = w;
                    while idx < items.len() {
                        out.push((idx, f(&items[idx])));
                        idx += workers;
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, r)| r).collect()
}

/// Truncate to at most `max_chars` characters, cutting from the tail.
pub fn truncate_chars_tail(text: &str, max_chars: usize) -> &str {
    match text.char_indices().nth(max_chars) {
        Some((idx, _)) => &text[..idx],
        None => text,
    }
}

/// Keep at most the last `max_chars` characters, cutting from the head.
pub fn truncate_chars_head(text: &str, max_chars: usize) -> &str {
    let total = text.chars().count();
    if total <= max_chars {
        return text;
    }
    let skip = total - max_chars;
    match text.char_indices().nth(skip) {
        Some((idx, _)) => &text[idx..],
        None => "",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_matches_reference_vectors() {
        // Reference values for the 64-bit FNV-1a test suite.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn splitmix_is_reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn inclusive_lines_round_trip() {
        for text in ["", "a", "a\n", "a\nb", "a\nb\n", "\n\n"] {
            assert_eq!(inclusive_lines(text).concat(), text);
        }
    }

    #[test]
    fn head_and_tail_lines() {
        let text = "one\ntwo\nthree";
        assert_eq!(tail_lines(text, 2), "two\nthree");
        assert_eq!(head_lines(text, 2), "one\ntwo\n");
        assert_eq!(tail_lines(text, 10), text);
        assert_eq!(head_lines("", 3), "");
    }

    #[test]
    fn unit_accounting_rounds_up() {
        assert_eq!(budget_units(""), 0);
        assert_eq!(budget_units("abc"), 1);
        assert_eq!(budget_units("abcd"), 1);
        assert_eq!(budget_units("abcde"), 2);
    }

    #[test]
    fn char_truncation_respects_boundaries() {
        assert_eq!(truncate_chars_tail("héllo", 2), "hé");
        assert_eq!(truncate_chars_head("héllo", 2), "lo");
        assert_eq!(truncate_chars_head("ab", 5), "ab");
    }
}
