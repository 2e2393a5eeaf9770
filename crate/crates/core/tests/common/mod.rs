//! Frozen oracle values shared by the integration tests.
//!
//! SARI values come from tests/oracles/metric_oracle.py and the dataset
//! statistics from tests/oracles/stats_oracle.py (exact fractions).

#![allow(dead_code)]

use std::path::PathBuf;

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub const BIN: &str = env!("CARGO_BIN_EXE_msgrewrite");

pub struct SariCase {
    pub source: &'static str,
    pub prediction: &'static str,
    pub references: &'static [&'static str],
    pub expected: f64,
}

pub const SARI_SHEET: &[SariCase] = &[
    SariCase {
        source: "the cat sat",
        prediction: "the cat",
        references: &["the cat"],
        expected: 1.0,
    },
    SariCase {
        source: "the cat sat on the mat",
        prediction: "the cat sat on the mat",
        references: &["the cat sat on the mat"],
        expected: 1.0,
    },
    SariCase {
        source: "the cat sat on the mat",
        prediction: "a cat was on the mat",
        references: &["the cat was on the mat"],
        expected: 0.804629629630,
    },
    SariCase {
        source: "the cat sat on the mat",
        prediction: "the cat sat",
        references: &["the cat sat on a mat", "a cat sat"],
        expected: 0.418269230769,
    },
    SariCase {
        source: "he likes the dogs a lot",
        prediction: "he is fond of the dogs",
        references: &["he really likes the dogs", "he is fond of dogs"],
        expected: 0.675330687831,
    },
    SariCase {
        source: "please send me the report by friday",
        prediction: "send the report by friday",
        references: &["send me the report by friday"],
        expected: 0.443813131313,
    },
    SariCase {
        source: "i am running late to dinner",
        prediction: "i will be late for dinner",
        references: &["sorry i am running late to dinner"],
        expected: 0.055555555556,
    },
    SariCase {
        source: "about the meeting tomorrow",
        prediction: "regarding tomorrow's meeting",
        references: &[
            "regarding the meeting tomorrow",
            "about tomorrow's meeting",
            "on the meeting tomorrow",
        ],
        expected: 0.445454545455,
    },
    SariCase {
        source: "a b c d e",
        prediction: "a b c d e",
        references: &["a x c d e"],
        expected: 0.171296296296,
    },
    SariCase {
        source: "a b c d e",
        prediction: "f g h",
        references: &["a b c d e"],
        expected: 0.083333333333,
    },
    SariCase {
        source: "one two three",
        prediction: "one two three four",
        references: &["one two three four", "one two four"],
        expected: 0.647186147186,
    },
    SariCase {
        source: "the the the",
        prediction: "the the",
        references: &["the"],
        expected: 0.805555555556,
    },
    SariCase {
        source: "a b c d e",
        prediction: "f g h i",
        references: &["a b c d e"],
        expected: 0.0,
    },
];

/// (task, size, ins, sou, tar, len ratio, edit ratio) for data/toy_dataset.jsonl.
pub const TOY_STATS: &[(&str, usize, f64, f64, f64, f64, f64)] = &[
    ("formalize", 4, 21.0 / 4.0, 15.0 / 2.0, 10.0, 169.0 / 126.0, 17.0 / 16.0),
    ("shorten", 4, 5.0, 35.0 / 2.0, 11.0 / 2.0, 89.0 / 285.0, 2011.0 / 2280.0),
    ("elaborate", 4, 5.0, 4.0, 75.0 / 4.0, 299.0 / 60.0, 13.0 / 3.0),
    (
        "paraphrase",
        4,
        7.0 / 2.0,
        17.0 / 2.0,
        19.0 / 2.0,
        89.0 / 80.0,
        153.0 / 160.0,
    ),
    (
        "proofread",
        4,
        31.0 / 4.0,
        25.0 / 4.0,
        25.0 / 4.0,
        115.0 / 112.0,
        23.0 / 56.0,
    ),
    (
        "all",
        20,
        53.0 / 10.0,
        35.0 / 4.0,
        10.0,
        60029.0 / 34200.0,
        97609.0 / 63840.0,
    ),
];

/// Compares a stats table against the frozen sheet; word means exactly,
/// ratios within 1e-12.
pub fn check_toy_stats(stats: &msgrewrite::bench::DatasetStats) -> Result<(), String> {
    if stats.rows.len() != TOY_STATS.len() {
        return Err(format!("expected {} rows, got {}", TOY_STATS.len(), stats.rows.len()));
    }
    for (row, &(task, size, ins, sou, tar, len, edit)) in stats.rows.iter().zip(TOY_STATS) {
        if row.task != task || row.size != size || row.ins != ins || row.sou != sou || row.tar != tar {
            return Err(format!("row {task}: got {row:?}"));
        }
        if (row.len_ratio - len).abs() > 1e-12 || (row.edit_ratio - edit).abs() > 1e-12 {
            return Err(format!(
                "row {task}: ratios {} {} vs {len} {edit}",
                row.len_ratio, row.edit_ratio
            ));
        }
    }
    Ok(())
}
