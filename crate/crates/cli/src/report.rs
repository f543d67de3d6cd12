use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(path: &str, text: &str) -> Self {
        let d = Sha256::digest(text.as_bytes());
        InputDigest {
            path: path.to_string(),
            sha256: d.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxSummary {
    pub cost: u64,
    pub lower_bound: usize,
    pub ratio_bound: usize,
    pub degree_bound: usize,
    pub operations: usize,
}

/// The machine-readable result of comparing two trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub mode: String,
    pub method: String,
    pub b: usize,
    pub b_prime: usize,
    pub shared: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonshared_splits: Option<[Vec<Vec<String>>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl ComparisonReport {
    pub fn text(&self) -> String {
        let mut s = format!(
            "mode {}\nb {}\nb' {}\nshared {} {}\n",
            self.mode, self.b, self.b_prime, self.shared[0], self.shared[1]
        );
        if let Some(sp) = &self.nonshared_splits {
            for (name, side) in ["T", "T'"].iter().zip(sp) {
                for split in side {
                    s += &format!("{name} {}\n", split.join(","));
                }
            }
        }
        if let Some(a) = &self.approx {
            s += &format!(
                "cost {}\nlower_bound {}\nratio_bound {}\noperations {}\n",
                a.cost, a.lower_bound, a.ratio_bound, a.operations
            );
        }
        if let Some(t) = self.elapsed_seconds {
            s += &format!("elapsed {t:.6}\n");
        }
        s
    }
}
