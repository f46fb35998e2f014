//! Run configuration and the artifact-producing steps of the batch driver.
//!
//! Every step reads the artifacts of the previous one from the output
//! directory and writes its own. Text artifacts start with a two-line
//! envelope naming the artifact kind and the hash of the configuration that
//! produced it; a step refuses inputs produced under another configuration.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certify::{
    feasibility_margin, project_affine, verify_nonpositivity, FeasibilityMargin, HpRows, SampleSpec, SignCheck,
    VerificationReport, DEFAULT_SAFETY_FACTOR,
};
use crate::error::{Error, Result};
use crate::fourier::{CoefficientTensor, ModelParams};
use crate::geometry::{constraint_sample, minkowski_vertices_csv, region_csv};
use crate::hp::PrecisionGuard;
use crate::sdp::{export_sdpa, export_solution, import_solution, solve, SdpSolution, SolveStatus, SolverOptions};
use crate::sos::{assemble_feasibility_variant, assemble_problem_a, recover_tensor, AssembledProblem, FEASIBILITY_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Embedded,
    ExternalFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub d: usize,
    pub alpha_count: usize,
    pub grid_n: usize,
    pub enlargement: f64,
    pub precision_bits: usize,
    pub solver: SolverChoice,
    pub external_solution: Option<PathBuf>,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub verify_alpha_count: usize,
    pub verify_grid_n: usize,
    pub safety_factor: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        let v = SampleSpec::paper_scale();
        RunConfig {
            n: 5,
            d: 11,
            alpha_count: 5,
            grid_n: 50,
            enlargement: 1.02,
            precision_bits: 256,
            solver: SolverChoice::Embedded,
            external_solution: None,
            gap_tol: o.gap_tol,
            feas_tol: o.feas_tol,
            max_iter: o.max_iter,
            verify_alpha_count: v.alpha_count,
            verify_grid_n: v.grid_n,
            safety_factor: DEFAULT_SAFETY_FACTOR,
            output_dir: PathBuf::from("pentabound-out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedFile(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.d)
    }

    pub fn verify_spec(&self) -> SampleSpec {
        SampleSpec { alpha_count: self.verify_alpha_count, grid_n: self.verify_grid_n }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { max_iter: self.max_iter, ..SolverOptions::with_tolerances(self.gap_tol, self.feas_tol) }
    }

    /// Hash of everything except where the artifacts go.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let digest = Sha256::digest(serde_json::to_string(&c).expect("config serialises").as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.alpha_count < 2 || self.grid_n < 2 || self.verify_alpha_count < 2 || self.verify_grid_n < 2 {
            return Err(Error::InvalidParameter("sample sizes must be at least 2".into()));
        }
        if !(self.enlargement >= 1.0) {
            return Err(Error::InvalidParameter(format!("enlargement {} must be at least 1", self.enlargement)));
        }
        if self.precision_bits < 64 {
            return Err(Error::InvalidParameter(format!("precision {} bits is below 64", self.precision_bits)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub solver: SolverChoice,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub residual_before: f64,
    pub residual_after: f64,
    pub displacement: f64,
    pub tensor_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyArtifact {
    pub margin: FeasibilityMargin,
    pub sign: SignCheck,
}

#[derive(Serialize, Deserialize)]
struct JsonEnvelope<T> {
    format: String,
    config_hash: String,
    data: T,
}

pub const SAMPLE_FILE: &str = "sample.csv";
pub const MINKOWSKI_FILE: &str = "minkowski.csv";
pub const REGION_FILE: &str = "region.csv";
pub const PROBLEM_FILE: &str = "problem.dat-s";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SOLUTION_FILE: &str = "solution.sol";
pub const SOLVE_FILE: &str = "solve.json";
pub const FEASIBILITY_PROBLEM_FILE: &str = "feasibility.dat-s";
pub const FEASIBILITY_SOLUTION_FILE: &str = "feasibility.sol";
pub const FEASIBILITY_SOLVE_FILE: &str = "feasibility.json";
pub const PROJECTED_FILE: &str = "projected.sol";
pub const PROJECTION_FILE: &str = "projection.json";
pub const TENSOR_FILE: &str = "tensor.txt";
pub const VERIFY_FILE: &str = "verify.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

pub struct Pipeline {
    pub config: RunConfig,
    hash: String,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let hash = config.hash();
        Ok(Pipeline { config, hash })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn envelope(&self, comment: &str, kind: &str) -> String {
        format!("{comment} pentabound artifact {kind} v1\n{comment} config {}\n", self.hash)
    }

    fn write_text(&self, name: &str, comment: &str, kind: &str, body: &str) -> Result<()> {
        fs::create_dir_all(&self.config.output_dir)?;
        let path = self.path(name);
        fs::write(&path, format!("{}{body}", self.envelope(comment, kind)))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn read_text(&self, name: &str, comment: &str, kind: &str) -> Result<String> {
        let path = self.path(name);
        let text = fs::read_to_string(&path).map_err(|e| missing(&path, e))?;
        let expected = self.envelope(comment, kind);
        match text.strip_prefix(&expected) {
            Some(body) => Ok(body.to_string()),
            None => Err(Error::Precondition(format!(
                "{} is not a {kind} artifact of config {}; rerun the producing step",
                path.display(),
                self.hash
            ))),
        }
    }

    fn write_json<T: Serialize>(&self, name: &str, kind: &str, data: &T) -> Result<()> {
        fs::create_dir_all(&self.config.output_dir)?;
        let env = JsonEnvelope { format: format!("pentabound artifact {kind} v1"), config_hash: self.hash.clone(), data };
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(&env).expect("artifact serialises") + "\n")?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str, kind: &str) -> Result<T> {
        let path = self.path(name);
        let text = fs::read_to_string(&path).map_err(|e| missing(&path, e))?;
        let env: JsonEnvelope<T> =
            serde_json::from_str(&text).map_err(|e| Error::MalformedFile(format!("{}: {e}", path.display())))?;
        if env.format != format!("pentabound artifact {kind} v1") || env.config_hash != self.hash {
            return Err(Error::Precondition(format!(
                "{} is not a {kind} artifact of config {}; rerun the producing step",
                path.display(),
                self.hash
            )));
        }
        Ok(env.data)
    }

    fn assemble(&self) -> Result<AssembledProblem> {
        let sample = constraint_sample(self.config.alpha_count, self.config.grid_n)?;
        assemble_problem_a(self.config.params()?, &sample)
    }

    /// Assembles Problem A and checks it against the generated artifact.
    fn generated_problem(&self) -> Result<AssembledProblem> {
        let a = self.assemble()?;
        let on_disk = self.read_text(PROBLEM_FILE, "*", "sdpa")?;
        if on_disk != export_sdpa(&a.problem.standard_form()) {
            return Err(Error::Precondition(format!("{} does not match the assembled problem", self.path(PROBLEM_FILE).display())));
        }
        Ok(a)
    }

    /// Constraint sample and plot data. Returns the number of sample points.
    pub fn sample(&self) -> Result<usize> {
        let sample = constraint_sample(self.config.alpha_count, self.config.grid_n)?;
        let mut csv = String::from("x1,x2,rho,theta,alpha\n");
        for p in &sample {
            csv.push_str(&format!("{},{},{},{},{}\n", p.x[0], p.x[1], p.rho, p.theta, p.alpha));
        }
        self.write_text(SAMPLE_FILE, "#", "sample", &csv)?;
        self.write_text(MINKOWSKI_FILE, "#", "minkowski", &minkowski_vertices_csv(self.config.alpha_count))?;
        self.write_text(REGION_FILE, "#", "region", &region_csv(self.config.alpha_count, self.config.grid_n))?;
        Ok(sample.len())
    }

    pub fn generate(&self) -> Result<AssembledProblem> {
        let a = self.assemble()?;
        self.write_text(PROBLEM_FILE, "*", "sdpa", &export_sdpa(&a.problem.standard_form()))?;
        self.write_text(MANIFEST_FILE, "#", "manifest", &a.manifest_text())?;
        Ok(a)
    }

    /// Solves the generated problem, or imports an external solution when
    /// `import` is given or the configuration selects an external file.
    pub fn solve(&self, import: Option<&Path>) -> Result<SdpSolution> {
        let a = self.generated_problem()?;
        let std = a.problem.standard_form();
        let import = import.map(Path::to_path_buf).or_else(|| match self.config.solver {
            SolverChoice::ExternalFile => self.config.external_solution.clone(),
            SolverChoice::Embedded => None,
        });
        let (sol, solver) = match &import {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| missing(path, e))?;
                (import_solution(&std, &text)?, SolverChoice::ExternalFile)
            }
            None => (solve(&a.problem, &self.config.solver_options())?, SolverChoice::Embedded),
        };
        require_solved(&sol, "Problem A")?;
        self.write_text(SOLUTION_FILE, "*", "solution", &export_solution(&std, &sol))?;
        self.write_json(SOLVE_FILE, "solve", &summary(&sol, &std, solver))?;
        Ok(sol)
    }

    fn read_solution(&self, a: &AssembledProblem, name: &str) -> Result<SdpSolution> {
        let body = self.read_text(name, "*", "solution")?;
        import_solution(&a.problem.standard_form(), &body)
    }

    /// Feasibility re-solve with the objective capped just above `z*`.
    pub fn refine(&self) -> Result<SdpSolution> {
        let a = self.generated_problem()?;
        let sol = self.read_solution(&a, SOLUTION_FILE)?;
        let z_star = sol.primal_objective;
        let fv = assemble_feasibility_variant(&a, z_star);
        let std = fv.problem.standard_form();
        info!("feasibility variant with cap {}", z_star + FEASIBILITY_MARGIN);
        let fs = solve(&fv.problem, &self.config.solver_options())?;
        require_solved(&fs, "feasibility variant")?;
        self.write_text(FEASIBILITY_PROBLEM_FILE, "*", "sdpa", &export_sdpa(&std))?;
        self.write_text(FEASIBILITY_SOLUTION_FILE, "*", "solution", &export_solution(&std, &fs))?;
        self.write_json(FEASIBILITY_SOLVE_FILE, "solve", &summary(&fs, &std, SolverChoice::Embedded))?;
        Ok(fs)
    }

    fn feasibility_problem(&self) -> Result<AssembledProblem> {
        let a = self.generated_problem()?;
        let sol = self.read_solution(&a, SOLUTION_FILE)?;
        Ok(assemble_feasibility_variant(&a, sol.primal_objective))
    }

    pub fn project(&self) -> Result<ProjectionSummary> {
        let fv = self.feasibility_problem()?;
        let fs = self.read_solution(&fv, FEASIBILITY_SOLUTION_FILE)?;
        let _guard = PrecisionGuard::set(self.config.precision_bits);
        let rows = HpRows::from_assembled(&fv)?;
        let pr = project_affine(&fs, &rows)?;
        let tensor = recover_tensor(&pr.solution, &fv.layout)?;
        let std = fv.problem.standard_form();
        self.write_text(PROJECTED_FILE, "*", "solution", &export_solution(&std, &pr.solution))?;
        self.write_text(TENSOR_FILE, "*", "tensor", &tensor.to_text())?;
        let s = ProjectionSummary {
            residual_before: pr.residual_before,
            residual_after: pr.residual_after,
            displacement: pr.displacement,
            tensor_hash: tensor.hash(),
        };
        self.write_json(PROJECTION_FILE, "projection", &s)?;
        Ok(s)
    }

    pub fn tensor(&self) -> Result<CoefficientTensor> {
        CoefficientTensor::from_text(&self.read_text(TENSOR_FILE, "*", "tensor")?)
    }

    pub fn verify(&self) -> Result<VerifyArtifact> {
        let fv = self.feasibility_problem()?;
        let projected = self.read_solution(&fv, PROJECTED_FILE)?;
        let tensor = self.tensor()?;
        let bits = self.config.precision_bits;
        let _guard = PrecisionGuard::set(bits);
        let rows = HpRows::from_assembled(&fv)?;
        let margin = feasibility_margin(&projected.x, fv.layout.blocks.len(), &rows, bits);
        let sign = verify_nonpositivity(&tensor, self.config.enlargement, self.config.verify_spec(), bits)?;
        let v = VerifyArtifact { margin, sign };
        self.write_json(VERIFY_FILE, "verify", &v)?;
        Ok(v)
    }

    pub fn bound(&self) -> Result<VerificationReport> {
        let tensor = self.tensor()?;
        let v: VerifyArtifact = self.read_json(VERIFY_FILE, "verify")?;
        let report = VerificationReport::new(
            &tensor,
            &v.margin,
            &v.sign,
            self.config.enlargement,
            self.config.safety_factor,
            self.config.verify_spec(),
        )?;
        self.write_text(REPORT_TEXT_FILE, "#", "report", &report.to_text())?;
        self.write_json(REPORT_JSON_FILE, "report", &report)?;
        Ok(report)
    }

    pub fn all(&self) -> Result<VerificationReport> {
        let points = self.sample()?;
        info!("constraint sample: {points} points");
        self.generate()?;
        self.solve(None)?;
        self.refine()?;
        self.project()?;
        self.verify()?;
        self.bound()
    }
}

fn missing(path: &Path, e: std::io::Error) -> Error {
    Error::Precondition(format!("cannot read {}: {e}", path.display()))
}

fn require_solved(sol: &SdpSolution, what: &str) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(()),
        s => Err(Error::Solver(format!("{what} ended with status {s}"))),
    }
}

fn summary(sol: &SdpSolution, std: &crate::sdp::StandardSdp, solver: SolverChoice) -> SolveSummary {
    SolveSummary {
        solver,
        status: sol.status,
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        max_residual: sol.max_residual(std),
        min_eigenvalue: sol.min_eigenvalue(),
    }
}
