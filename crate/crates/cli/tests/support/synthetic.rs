//! Deterministic PROMISE-layout stand-ins for the Ant 1.7 and Camel 1.6
//! defect tables: same row and buggy counts, log-normal metric columns
//! shaped after the published per-project moments, and the two classes
//! the worked examples discuss.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, LogNormal};

pub struct StandIn {
    pub file: &'static str,
    pub project: &'static str,
    pub version: &'static str,
    pub package: &'static str,
    pub rows: usize,
    pub buggy: usize,
    /// `(mean, sd)` for wmc, cbo, rfc, lcom.
    pub moments: [(f64, f64); 4],
    /// `(class, [wmc, cbo, rfc, lcom], bugs)`.
    pub fixed: &'static [(&'static str, [u32; 4], u32)],
    pub seed: u64,
}

pub const ANT: StandIn = StandIn {
    file: "ant-1.7.csv",
    project: "ant",
    version: "1.7",
    package: "org.apache.tools.ant",
    rows: 745,
    buggy: 166,
    moments: [
        (11.07, 11.97),
        (11.04, 26.34),
        (34.36, 36.02),
        (89.14, 349.93),
    ],
    fixed: &[
        (
            "org.apache.tools.ant.taskdefs.DispatchTask",
            [4, 3, 5, 4],
            0,
        ),
        (
            "org.apache.tools.ant.util.SplitClassLoader",
            [6, 9, 20, 15],
            0,
        ),
    ],
    seed: 17,
};

pub const CAMEL: StandIn = StandIn {
    file: "camel-1.6.csv",
    project: "camel",
    version: "1.6",
    package: "org.apache.camel",
    rows: 965,
    buggy: 188,
    moments: [
        (8.57, 11.20),
        (11.10, 22.52),
        (21.20, 25.00),
        (79.33, 523.75),
    ],
    fixed: &[
        ("org.apache.camel.Exchange", [26, 448, 26, 325], 28),
        ("org.apache.camel.processor.Splitter", [9, 14, 40, 20], 1),
        ("org.apache.camel.util.ExtractorHelper", [3, 2, 6, 1], 0),
    ],
    seed: 16,
};

const PARTS: &[&str] = &[
    "Default", "Abstract", "Simple", "Bean", "File", "Jms", "Http", "Xml", "Route", "Task", "Type",
    "Path", "Resource", "Stream", "Mapper", "Filter", "Builder", "Context", "Util", "Support",
];
const SUFFIXES: &[&str] = &[
    "Component",
    "Endpoint",
    "Processor",
    "Handler",
    "Factory",
    "Test",
    "Impl",
    "Converter",
];
const PACKAGES: &[&str] = &[
    "impl",
    "util",
    "model",
    "component",
    "taskdefs",
    "types",
    "spi",
    "processor",
];

impl StandIn {
    pub fn csv(&self) -> String {
        let mut rng = StdRng::seed_from_u64(self.seed);
        let dists: Vec<LogNormal<f64>> = self
            .moments
            .iter()
            .map(|(m, s)| {
                let var = (1.0 + (s * s) / (m * m)).ln();
                LogNormal::new(m.ln() - var / 2.0, var.sqrt()).unwrap()
            })
            .collect();

        let generated = self.rows - self.fixed.len();
        let fixed_buggy = self.fixed.iter().filter(|f| f.2 > 0).count();
        let mut bugs = vec![0u32; generated];
        for b in bugs.iter_mut().take(self.buggy - fixed_buggy) {
            *b = rng.random_range(1..=6);
        }
        bugs.shuffle(&mut rng);

        let mut out =
            String::from("name,version,name,wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,loc,bug\n");
        let mut fixed = self.fixed.iter();
        let insert_every = self.rows / (self.fixed.len() + 1);
        let mut g = 0;
        for row in 0..self.rows {
            let (name, values, bug) = match (row > 0 && row % insert_every == 0)
                .then(|| fixed.next())
                .flatten()
            {
                Some((name, v, b)) => (name.to_string(), *v, *b),
                None => {
                    let name = format!(
                        "{}.{}.{}{}{}",
                        self.package,
                        PACKAGES[rng.random_range(0..PACKAGES.len())],
                        PARTS[rng.random_range(0..PARTS.len())],
                        SUFFIXES[rng.random_range(0..SUFFIXES.len())],
                        row
                    );
                    let mut v = [0u32; 4];
                    for (slot, d) in v.iter_mut().zip(&dists) {
                        *slot = d.sample(&mut rng).round().min(5000.0) as u32;
                    }
                    let b = bugs[g];
                    g += 1;
                    (name, v, b)
                }
            };
            let [wmc, cbo, rfc, lcom] = values;
            let _ = writeln!(
                out,
                "{},{},{name},{wmc},{},{},{cbo},{rfc},{lcom},{},{},{},{},{bug}",
                self.project,
                self.version,
                rng.random_range(1..5),
                rng.random_range(0..3),
                cbo / 2,
                cbo - cbo / 2,
                wmc,
                wmc * 12
            );
        }
        assert!(fixed.next().is_none(), "every fixed class is placed");
        out
    }

    pub fn write_to(&self, dir: &Path) -> PathBuf {
        let path = dir.join(self.file);
        std::fs::write(&path, self.csv()).unwrap();
        path
    }
}
