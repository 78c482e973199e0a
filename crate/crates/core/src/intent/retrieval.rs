use std::collections::BTreeMap;

use super::{ExemplarCorpus, Exemplar, Token};

/// Smoothed TF-IDF weights over the English side of a corpus.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, term frequency is the raw count,
/// and query terms outside the corpus vocabulary carry no weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TermIndex {
    idf: BTreeMap<String, f64>,
    docs: Vec<BTreeMap<String, f64>>,
}

fn counts<'a>(terms: impl Iterator<Item = &'a str>) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for t in terms {
        *tf.entry(t.to_string()).or_insert(0.0) += 1.0;
    }
    tf
}

fn norm(v: &BTreeMap<String, f64>) -> f64 {
    v.values().map(|x| x * x).sum::<f64>().sqrt()
}

impl TermIndex {
    pub fn build(documents: &[Vec<Token>]) -> Self {
        let n = documents.len() as f64;
        let tfs: Vec<_> = documents.iter().map(|d| counts(d.iter().map(Token::term))).collect();
        let mut df: BTreeMap<String, f64> = BTreeMap::new();
        for tf in &tfs {
            for term in tf.keys() {
                *df.entry(term.clone()).or_insert(0.0) += 1.0;
            }
        }
        let idf: BTreeMap<String, f64> = df
            .into_iter()
            .map(|(t, d)| (t, ((1.0 + n) / (1.0 + d)).ln() + 1.0))
            .collect();
        let docs = tfs
            .into_iter()
            .map(|tf| tf.into_iter().map(|(t, c)| {
                let w = c * idf[&t];
                (t, w)
            }).collect())
            .collect();
        Self { idf, docs }
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.idf.get(term).copied()
    }

    fn vectorize(&self, query: &[Token]) -> BTreeMap<String, f64> {
        counts(query.iter().map(Token::term))
            .into_iter()
            .filter_map(|(t, c)| self.idf.get(&t).map(|w| (t, c * w)))
            .collect()
    }

    /// Cosine similarity between the query and every document, in corpus
    /// order. Zero vectors have similarity 0.
    pub fn similarities(&self, query: &[Token]) -> Vec<f64> {
        let q = self.vectorize(query);
        let qn = norm(&q);
        self.docs
            .iter()
            .map(|d| {
                let dn = norm(d);
                if qn == 0.0 || dn == 0.0 {
                    return 0.0;
                }
                let dot: f64 = q.iter().filter_map(|(t, w)| d.get(t).map(|v| v * w)).sum();
                dot / (qn * dn)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Retrieved<'a> {
    pub index: usize,
    pub similarity: f64,
    pub exemplar: &'a Exemplar,
}

/// Top-`k` exemplars by cosine similarity; ties go to the lower index.
pub fn retrieve_exemplars<'a>(query: &[Token], corpus: &'a ExemplarCorpus, k: usize) -> Vec<Retrieved<'a>> {
    let sims = corpus.index().similarities(query);
    let mut ranked: Vec<Retrieved<'a>> = sims
        .into_iter()
        .enumerate()
        .map(|(index, similarity)| Retrieved { index, similarity, exemplar: &corpus.entries()[index] })
        .collect();
    ranked.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then(a.index.cmp(&b.index)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::normalize;

    const NILE: &str = "define intent a: from endpoint('cn') to endpoint('ue1') set bandwidth('max', '1', 'kbps')";

    fn corpus(english: &[&str]) -> ExemplarCorpus {
        ExemplarCorpus::new(english.iter().map(|e| (e.to_string(), NILE.to_string())).collect()).unwrap()
    }

    #[test]
    fn self_query_ranks_first_with_unit_similarity() {
        let c = corpus(&["limit video to 1 mbps", "guarantee voice at least 64 kbps", "cap gaming traffic"]);
        for (i, e) in c.entries().iter().enumerate() {
            let top = &retrieve_exemplars(&normalize(e.english()).unwrap(), &c, 1)[0];
            assert_eq!(top.index, i);
            assert!((top.similarity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_query_returns_first_k_by_index() {
        let c = corpus(&["alpha beta", "gamma delta", "epsilon zeta"]);
        let got = retrieve_exemplars(&normalize("unrelated words").unwrap(), &c, 2);
        assert_eq!(got.iter().map(|r| r.index).collect::<Vec<_>>(), [0, 1]);
        assert!(got.iter().all(|r| r.similarity == 0.0));
    }

    #[test]
    fn k_larger_than_corpus_returns_everything() {
        let c = corpus(&["a b", "c d"]);
        assert_eq!(retrieve_exemplars(&normalize("a").unwrap(), &c, 10).len(), 2);
    }

    // Values computed by hand for the three documents
    //   d0 = "limit video traffic", d1 = "limit voice traffic", d2 = "guarantee voice calls"
    // with N = 3, idf = ln(4 / (1 + df)) + 1:
    //   df: limit 2, video 1, traffic 2, voice 2, guarantee 1, calls 1
    //   idf(df=1) = ln 2 + 1 = 1.693147..., idf(df=2) = ln(4/3) + 1 = 1.287682...
    // Query "limit voice": q = (limit a, voice a) with a = idf(df=2).
    //   cos(q, d0) = a^2 / (sqrt(2) a * sqrt(2a^2 + b^2))          = 0.3661796
    //   cos(q, d1) = 2a^2 / (sqrt(2) a * sqrt(3) a) = 2/sqrt(6)      = 0.8164966
    //   cos(q, d2) = a^2 / (sqrt(2) a * sqrt(a^2 + 2b^2))            = 0.3349067
    // with b = idf(df=1).
    #[test]
    fn matches_hand_computed_cosines() {
        let c = corpus(&["limit video traffic", "limit voice traffic", "guarantee voice calls"]);
        let got = retrieve_exemplars(&normalize("limit voice").unwrap(), &c, 3);
        let order: Vec<usize> = got.iter().map(|r| r.index).collect();
        assert_eq!(order, [1, 0, 2]);
        let expected = [0.816_496_580_927_726_1, 0.366_179_571_421_107_4, 0.334_906_702_661_303_07];
        for (r, e) in got.iter().zip(expected) {
            assert!((r.similarity - e).abs() < 1e-9, "{} vs {e}", r.similarity);
        }
    }
}
