//! Synthetic workflow gallery.
//!
//! Generates DAG workflows whose shapes follow five well-known scientific
//! workflow families: CyberShake (seismogram synthesis), Epigenomics
//! (parallel read-mapping lanes), LIGO Inspiral (template-bank groups),
//! Montage (image mosaicking), and SIPHT (sRNA annotation). Runtimes and
//! dataset sizes are drawn from family-typical ranges with a seeded
//! generator, so the bundled `fixtures/*.dax` files are reproducible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::{self, tag};
use crate::workflow::{DataDependency, Task, Workflow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    CyberShake,
    Epigenomics,
    Inspiral,
    Montage,
    Sipht,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::CyberShake,
        Family::Epigenomics,
        Family::Inspiral,
        Family::Montage,
        Family::Sipht,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Family::CyberShake => "CyberShake",
            Family::Epigenomics => "Epigenomics",
            Family::Inspiral => "Inspiral",
            Family::Montage => "Montage",
            Family::Sipht => "Sipht",
        }
    }

    fn id(&self) -> u64 {
        match self {
            Family::CyberShake => 1,
            Family::Epigenomics => 2,
            Family::Inspiral => 3,
            Family::Montage => 4,
            Family::Sipht => 5,
        }
    }
}

/// The fifteen bundled fixture shapes: each family at roughly 30, 50, and
/// 100 tasks.
pub fn bundled_specs() -> Vec<(Family, usize)> {
    let mut specs = Vec::new();
    for family in Family::ALL {
        for approx in [30, 50, 100] {
            specs.push((family, approx));
        }
    }
    specs
}

/// File name of a bundled fixture, e.g. `cybershake_30.dax`.
pub fn fixture_file_name(family: Family, approx_tasks: usize) -> String {
    format!("{}_{approx_tasks}.dax", family.label().to_lowercase())
}

/// Seed used for the bundled fixture files.
pub const BUNDLED_SEED: u64 = 7;

struct Builder {
    tasks: Vec<Task>,
    edges: Vec<DataDependency>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            tasks: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn task(&mut self, kind: &str, rng: &mut ChaCha8Rng, runtime_range: (f64, f64)) -> usize {
        let index = self.tasks.len();
        let runtime = round2(rng.gen_range(runtime_range.0..=runtime_range.1));
        self.tasks.push(Task {
            id: format!("{kind}_{index:05}"),
            index,
            reference_runtime: runtime,
        });
        index
    }

    fn edge_mb(&mut self, from: usize, to: usize, rng: &mut ChaCha8Rng, mb_range: (f64, f64)) {
        let size_bytes = (rng.gen_range(mb_range.0..=mb_range.1) * 1e6) as u64;
        self.edges.push(DataDependency {
            from,
            to,
            size_bytes,
        });
    }

    fn control_edge(&mut self, from: usize, to: usize) {
        self.edges.push(DataDependency {
            from,
            to,
            size_bytes: 0,
        });
    }

    fn build(self, name: String) -> Workflow {
        Workflow {
            name,
            tasks: self.tasks,
            edges: self.edges,
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Generate one synthetic workflow with approximately `approx_tasks` tasks.
pub fn synthetic_workflow(family: Family, approx_tasks: usize, seed: u64) -> Workflow {
    let mut rng = rng::substream(seed, &[tag::FIXTURE_GEN, family.id(), approx_tasks as u64]);
    let name = format!("{}_{approx_tasks}", family.label());
    let w = match family {
        Family::CyberShake => cybershake(approx_tasks, &mut rng),
        Family::Epigenomics => epigenomics(approx_tasks, &mut rng),
        Family::Inspiral => inspiral(approx_tasks, &mut rng),
        Family::Montage => montage(approx_tasks, &mut rng),
        Family::Sipht => sipht(approx_tasks, &mut rng),
    };
    let w = w.build(name);
    w.validate().expect("generated workflows are valid DAGs");
    w
}

/// Two SGT extractions fan out to seismogram synthesis tasks, each paired
/// with a peak-value calculation; two zip tasks collect the outputs.
fn cybershake(approx: usize, rng: &mut ChaCha8Rng) -> Builder {
    let k = ((approx.saturating_sub(4)) / 2).max(2);
    let mut b = Builder::new();
    let sgt0 = b.task("ExtractSGT", rng, (100.0, 220.0));
    let sgt1 = b.task("ExtractSGT", rng, (100.0, 220.0));
    let zip_seis = b.task("ZipSeis", rng, (30.0, 80.0));
    let zip_psa = b.task("ZipPSA", rng, (30.0, 80.0));
    for i in 0..k {
        let synth = b.task("SeismogramSynthesis", rng, (40.0, 90.0));
        let peak = b.task("PeakValCalcOkaya", rng, (0.5, 3.0));
        let sgt = if i % 2 == 0 { sgt0 } else { sgt1 };
        b.edge_mb(sgt, synth, rng, (150.0, 400.0));
        b.edge_mb(synth, peak, rng, (5.0, 20.0));
        b.edge_mb(synth, zip_seis, rng, (10.0, 40.0));
        b.edge_mb(peak, zip_psa, rng, (1.0, 5.0));
    }
    b
}

/// One fastq split feeds parallel filter-convert-map lanes that merge and
/// finish with indexing and pileup.
fn epigenomics(approx: usize, rng: &mut ChaCha8Rng) -> Builder {
    let lanes = ((approx.saturating_sub(2)) / 4).max(1);
    let mut b = Builder::new();
    let split = b.task("FastqSplit", rng, (30.0, 60.0));
    let merge = b.task("MapMerge", rng, (250.0, 600.0));
    let index = b.task("MaqIndex", rng, (100.0, 250.0));
    let pileup = b.task("Pileup", rng, (150.0, 350.0));
    b.edge_mb(merge, index, rng, (50.0, 150.0));
    b.edge_mb(index, pileup, rng, (30.0, 80.0));
    for _ in 0..lanes {
        let filter = b.task("FilterContams", rng, (150.0, 300.0));
        let sanger = b.task("Sol2Sanger", rng, (20.0, 50.0));
        let bfq = b.task("Fastq2Bfq", rng, (60.0, 120.0));
        let map = b.task("Map", rng, (1500.0, 3500.0));
        b.edge_mb(split, filter, rng, (200.0, 500.0));
        b.edge_mb(filter, sanger, rng, (150.0, 400.0));
        b.edge_mb(sanger, bfq, rng, (80.0, 200.0));
        b.edge_mb(bfq, map, rng, (40.0, 120.0));
        b.edge_mb(map, merge, rng, (30.0, 80.0));
    }
    b
}

/// Groups of template banks and matched-filter tasks funnel through
/// coincidence analyses.
fn inspiral(approx: usize, rng: &mut ChaCha8Rng) -> Builder {
    let banks = 4usize;
    let groups = ((approx as f64 / (4 * banks) as f64).round() as usize).max(1);
    let mut b = Builder::new();
    for _ in 0..groups {
        let thinca1 = b.task("Thinca", rng, (5.0, 20.0));
        let thinca2 = b.task("Thinca", rng, (5.0, 20.0));
        let mut inspirals = Vec::new();
        for _ in 0..banks {
            let bank = b.task("TmpltBank", rng, (300.0, 700.0));
            let insp = b.task("Inspiral", rng, (300.0, 700.0));
            b.edge_mb(bank, insp, rng, (1.0, 8.0));
            b.edge_mb(insp, thinca1, rng, (0.5, 2.0));
            inspirals.push(insp);
        }
        for _ in 0..banks.saturating_sub(1) {
            let trig = b.task("TrigBank", rng, (5.0, 30.0));
            let insp2 = b.task("Inspiral", rng, (200.0, 500.0));
            b.edge_mb(thinca1, trig, rng, (0.5, 2.0));
            b.edge_mb(trig, insp2, rng, (1.0, 5.0));
            b.edge_mb(insp2, thinca2, rng, (0.5, 2.0));
        }
    }
    b
}

/// Projection tasks, pairwise difference fits, a background model, and the
/// final mosaic chain.
fn montage(approx: usize, rng: &mut ChaCha8Rng) -> Builder {
    let p = (((approx.saturating_sub(3)) as f64 / 4.0).round() as usize).max(3);
    let mut b = Builder::new();
    let mut projections = Vec::with_capacity(p);
    let mut proj_mb = Vec::with_capacity(p);
    for _ in 0..p {
        let t = b.task("mProjectPP", rng, (10.0, 25.0));
        projections.push(t);
        proj_mb.push(rng.gen_range(3.0..=6.0));
    }
    let concat = b.task("mConcatFit", rng, (5.0, 15.0));
    for j in 0..p {
        for offset in [1, 2] {
            if j + offset >= p {
                continue;
            }
            let diff = b.task("mDiffFit", rng, (5.0, 15.0));
            for &src in [projections[j], projections[j + offset]].iter() {
                let mb = proj_mb[if src == projections[j] { j } else { j + offset }];
                b.edges.push(DataDependency {
                    from: src,
                    to: diff,
                    size_bytes: (mb * 1e6) as u64,
                });
            }
            b.edge_mb(diff, concat, rng, (0.1, 0.5));
        }
    }
    let bg_model = b.task("mBgModel", rng, (10.0, 30.0));
    b.edge_mb(concat, bg_model, rng, (0.1, 0.5));
    let imgtbl = b.task("mImgtbl", rng, (5.0, 15.0));
    for (j, &proj) in projections.iter().enumerate() {
        let background = b.task("mBackground", rng, (5.0, 15.0));
        b.edge_mb(bg_model, background, rng, (0.05, 0.2));
        b.edges.push(DataDependency {
            from: proj,
            to: background,
            size_bytes: (proj_mb[j] * 1e6) as u64,
        });
        b.edge_mb(background, imgtbl, rng, (3.0, 6.0));
    }
    let add = b.task("mAdd", rng, (20.0, 60.0));
    b.edge_mb(imgtbl, add, rng, (0.5, 2.0));
    let shrink = b.task("mShrink", rng, (5.0, 20.0));
    b.edge_mb(add, shrink, rng, (10.0, 30.0));
    let jpeg = b.task("mJPEG", rng, (1.0, 5.0));
    b.edge_mb(shrink, jpeg, rng, (1.0, 5.0));
    b
}

/// Many pattern-search tasks plus a terminator/motif/blast block feeding
/// the sRNA prediction and annotation stages.
fn sipht(approx: usize, rng: &mut ChaCha8Rng) -> Builder {
    let patsers = approx.saturating_sub(12).max(4);
    let mut b = Builder::new();
    let concate = b.task("PatserConcate", rng, (2.0, 10.0));
    for _ in 0..patsers {
        let patser = b.task("Patser", rng, (1.0, 10.0));
        b.edge_mb(patser, concate, rng, (0.1, 1.0));
    }
    let srna = b.task("SRNA", rng, (300.0, 700.0));
    let transterm = b.task("Transterm", rng, (30.0, 90.0));
    let findterm = b.task("Findterm", rng, (1200.0, 2400.0));
    let motif = b.task("RNAMotif", rng, (20.0, 60.0));
    let blast = b.task("Blast", rng, (1000.0, 2000.0));
    b.edge_mb(transterm, srna, rng, (0.1, 1.0));
    b.edge_mb(findterm, srna, rng, (5.0, 15.0));
    b.edge_mb(motif, srna, rng, (0.1, 1.0));
    b.edge_mb(blast, srna, rng, (5.0, 15.0));
    let annotate = b.task("SRNAAnnotate", rng, (20.0, 60.0));
    for kind in [
        "FFNParse",
        "BlastSynteny",
        "BlastCandidate",
        "BlastQRNA",
        "BlastParalogues",
    ] {
        let range = match kind {
            "FFNParse" => (2.0, 10.0),
            "BlastSynteny" => (100.0, 300.0),
            "BlastCandidate" => (30.0, 90.0),
            "BlastQRNA" => (300.0, 800.0),
            _ => (60.0, 180.0),
        };
        let t = b.task(kind, rng, range);
        b.edge_mb(srna, t, rng, (1.0, 5.0));
        b.edge_mb(t, annotate, rng, (0.5, 3.0));
    }
    b.control_edge(concate, annotate);
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::{parse_dax, to_dax};
    use std::path::PathBuf;

    fn fixtures_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    }

    #[test]
    fn families_hit_their_approximate_sizes() {
        for (family, approx) in bundled_specs() {
            let w = synthetic_workflow(family, approx, BUNDLED_SEED);
            let n = w.task_count();
            assert!(
                n as f64 >= approx as f64 * 0.85 && n as f64 <= approx as f64 * 1.15,
                "{} at {approx}: got {n} tasks",
                family.label()
            );
            w.validate().unwrap();
            assert!(!w.edges.is_empty());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = synthetic_workflow(Family::Montage, 50, 3);
        let b = synthetic_workflow(Family::Montage, 50, 3);
        assert_eq!(to_dax(&a), to_dax(&b));
        let c = synthetic_workflow(Family::Montage, 50, 4);
        assert_ne!(to_dax(&a), to_dax(&c));
    }

    #[test]
    fn generated_dax_round_trips() {
        let w = synthetic_workflow(Family::CyberShake, 30, BUNDLED_SEED);
        let parsed = parse_dax(&to_dax(&w)).unwrap();
        assert_eq!(parsed.tasks.len(), w.tasks.len());
        assert_eq!(parsed.edges.len(), w.edges.len());
        parsed.validate().unwrap();
    }

    /// Guards the committed fixture files against generator drift.
    #[test]
    fn bundled_files_match_generator_output() {
        for (family, approx) in bundled_specs() {
            let path = fixtures_dir().join(fixture_file_name(family, approx));
            let on_disk = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
            let generated = to_dax(&synthetic_workflow(family, approx, BUNDLED_SEED));
            assert_eq!(on_disk, generated, "stale fixture {}", path.display());
        }
    }

    /// Regenerates the bundled fixture files in place. Run manually after
    /// intentional generator changes:
    /// `cargo test -p fuzzsched regenerate_bundled_fixtures -- --ignored`
    #[test]
    #[ignore = "writes the bundled fixture files"]
    fn regenerate_bundled_fixtures() {
        let dir = fixtures_dir();
        std::fs::create_dir_all(&dir).unwrap();
        for (family, approx) in bundled_specs() {
            let w = synthetic_workflow(family, approx, BUNDLED_SEED);
            let path = dir.join(fixture_file_name(family, approx));
            std::fs::write(&path, to_dax(&w)).unwrap();
        }
    }
}
