//! One-shot state redistribution with an incoherent receiver.
//!
//! Alice holds `A C` of a pure `|Φ⟩_{RABC}` and must hand `C` to Bob, who
//! holds `B` and may only use incoherent operations and diagonal tests.
//! Shared entanglement is `n` purified copies of a free `σ_C` on `L_i C_i`.
//! Alice rotates her side onto the convex-split purification, measures the
//! copy index `J`, and sends which block of `b` copies holds `C`; Bob then
//! scans the block with a restricted hypothesis test.

use alloc::format;
use alloc::vec::Vec;

use super::uhlmann::uhlmann_parts;
use super::{
    ceil_tolerant, check_budget, copy_label, Actor, ProtocolTranscript, ResourceCounters,
    BOUND_SLACK,
};
use crate::coherence::{dephase, is_incoherent_channel, Coherence, Dephasing, ResourceTheory};
use crate::entropy::{
    kernel_weight, max_relative_entropy, restricted_hypothesis_test, EntropicValue, SUPPORT_TOL,
};
use crate::qmat::linalg::{Matrix, C64};
use crate::qmat::{
    apply_local, tensor, DensityOperator, KrausChannel, Register, RegisterSystem, StateVector,
};
use crate::{Error, Result, DEFAULT_BUDGET};

/// Register roles of a redistribution instance, in canonical order.
pub const ROLES: [&str; 4] = ["R", "A", "B", "C"];

/// A redistribution task `|Φ⟩_{RABC}` with its error parameters.
#[derive(Clone, Debug)]
pub struct QsrInstance {
    psi: StateVector,
    eps1: f64,
    eps2: f64,
    gamma: f64,
    sigma_c: DensityOperator,
    n_override: Option<usize>,
    b_override: Option<usize>,
    budget: usize,
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {x}"
        )))
    }
}

impl QsrInstance {
    /// Missing roles are added as dimension-1 registers; `σ_C` defaults to
    /// the dephased marginal `Δ(ρ_C)`.
    pub fn new(psi: StateVector, eps1: f64, eps2: f64, gamma: f64) -> Result<Self> {
        open_unit("eps1", eps1)?;
        open_unit("eps2", eps2)?;
        open_unit("gamma", gamma)?;
        let psi = Self::pad_roles(&psi)?;
        let sigma_c = dephase(&psi.reduced(&["C"])?, &["C"])?;
        let inst = Self {
            psi,
            eps1,
            eps2,
            gamma,
            sigma_c,
            n_override: None,
            b_override: None,
            budget: DEFAULT_BUDGET,
        };
        inst.check_sigma(&inst.sigma_c)?;
        Ok(inst)
    }

    /// Reorders `psi` to `R, A, B, C`, inserting trivial registers for absent roles.
    pub fn pad_roles(psi: &StateVector) -> Result<StateVector> {
        for l in psi.system().labels() {
            if !ROLES.contains(&l) {
                return Err(Error::InvalidParameter(format!(
                    "register `{l}` is not one of R, A, B, C"
                )));
            }
        }
        let mut regs: Vec<Register> = psi.system().registers().to_vec();
        for role in ROLES {
            if !psi.system().contains(role) {
                regs.push(Register {
                    label: role.into(),
                    dim: 1,
                });
            }
        }
        let padded = StateVector::new(RegisterSystem::new(regs)?, psi.amplitudes().to_vec())?;
        padded.reorder(&ROLES)
    }

    fn check_sigma(&self, sigma: &DensityOperator) -> Result<()> {
        if sigma.system().labels() != ["C"] || sigma.dim() != self.psi.system().dim_of("C")? {
            return Err(Error::SystemMismatch);
        }
        if !Coherence.is_free_state(sigma) {
            return Err(Error::NotFree("sigma_C must be diagonal".into()));
        }
        let rho_c = self.psi.reduced(&["C"])?;
        if kernel_weight(rho_c.matrix(), &sigma.eigen()) > SUPPORT_TOL {
            return Err(Error::SupportViolation);
        }
        Ok(())
    }

    pub fn with_sigma(mut self, sigma_c: DensityOperator) -> Result<Self> {
        self.check_sigma(&sigma_c)?;
        self.sigma_c = sigma_c;
        Ok(self)
    }

    pub fn with_n_override(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "n override must be positive".into(),
            ));
        }
        self.n_override = Some(n);
        Ok(self)
    }

    pub fn with_b_override(mut self, b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidParameter(
                "b override must be positive".into(),
            ));
        }
        self.b_override = Some(b);
        Ok(self)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma_c(&self) -> &DensityOperator {
        &self.sigma_c
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn is_overridden(&self) -> bool {
        self.n_override.is_some() || self.b_override.is_some()
    }

    fn dim(&self, role: &str) -> usize {
        self.psi.system().dim_of(role).expect("roles are present")
    }

    /// Derived protocol parameters; cheap, builds no protocol state.
    pub fn parameters(&self) -> Result<QsrParameters> {
        let rho_rbc = self.psi.reduced(&["R", "B", "C"])?;
        let rho_rb = self.psi.reduced(&["R", "B"])?;
        let k = max_relative_entropy(&rho_rbc, &tensor(&rho_rb, &self.sigma_c)?)?;
        if !k.finite {
            return Err(Error::SupportViolation);
        }
        let k = k.value.max(0.0);
        let n = match self.n_override {
            Some(n) => n,
            None => {
                let n = ceil_tolerant(libm::pow(2.0, k) / (self.eps1 * self.eps1)).max(1.0);
                if n > usize::MAX as f64 / 4.0 {
                    return Err(Error::BudgetExceeded {
                        required: usize::MAX,
                        budget: self.budget,
                    });
                }
                n as usize
            }
        };

        let rho_bc = self.psi.reduced(&["B", "C"])?;
        let product = tensor(&self.psi.reduced(&["B"])?, &self.sigma_c)?;
        let eps_test = libm::pow(self.eps2, 4.0);
        let test = restricted_hypothesis_test(&rho_bc, &product, eps_test, &Dephasing)?;
        let b_raw = match self.b_override {
            Some(b) => b as f64,
            None if !test.value.finite => f64::INFINITY,
            None => ceil_tolerant(libm::pow(self.gamma, 4.0) * libm::pow(2.0, test.value.value))
                .max(1.0),
        };
        let b_clamped = b_raw > n as f64;
        let b = if b_clamped { n } else { b_raw as usize };
        let mut cobits = 0u32;
        while (b << cobits) < n {
            cobits += 1;
        }
        Ok(QsrParameters {
            k,
            n,
            b,
            b_clamped,
            cobits,
            d_f: test.value,
            alpha: test.type_ii,
            beta: (1.0 - test.accepted).max(0.0),
            test: test.operator,
            d_l: self.sigma_support().len(),
        })
    }

    /// Basis indices `c` with `σ_C[c,c] > 0`, in increasing order.
    fn sigma_support(&self) -> Vec<usize> {
        self.sigma_c
            .matrix()
            .real_diagonal()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > crate::EIG_ZERO)
            .map(|(c, _)| c)
            .collect()
    }

    /// Amplitudes held by the full simulation at `n` copies.
    pub fn required_amplitudes(&self, n: usize) -> u128 {
        let d_l = self.sigma_support().len() as u128;
        let (dr, da, db, dc) = (
            self.dim("R") as u128,
            self.dim("A") as u128,
            self.dim("B") as u128,
            self.dim("C") as u128,
        );
        let pow = |x: u128| x.checked_pow(n as u32).unwrap_or(u128::MAX);
        let s = dr.saturating_mul(db).saturating_mul(pow(dc));
        let x = da.saturating_mul(dc).saturating_mul(pow(d_l));
        let y = (n as u128)
            .max(dc)
            .saturating_mul(da)
            .saturating_mul(pow(d_l));
        s.saturating_mul(x.max(y))
    }
}

/// Parameters derived from an instance.
#[derive(Clone, Debug)]
pub struct QsrParameters {
    /// Unsmoothed `D_max(Φ_RBC‖Φ_RB ⊗ σ_C)`.
    pub k: f64,
    /// Number of shared `σ` copies.
    pub n: usize,
    /// Block length Bob scans.
    pub b: usize,
    /// True when the prescribed `b` exceeded `n` and was cut to `n`.
    pub b_clamped: bool,
    /// `⌈log₂(n/b)⌉`
    pub cobits: u32,
    /// `D_F^{ε₂⁴}(Φ_BC‖Φ_B ⊗ σ_C)`
    pub d_f: EntropicValue,
    /// `Tr(Π Φ_B ⊗ σ_C)`
    pub alpha: f64,
    /// `1 − Tr(Π Φ_BC)`
    pub beta: f64,
    /// Diagonal test `Π` on `B ⊗ C`.
    pub test: Matrix,
    /// Purifying dimension of each `σ` copy.
    pub d_l: usize,
}

/// Classical mixture of (unnormalized) pure branches over one system.
#[derive(Clone, Debug)]
pub struct BranchEnsemble {
    pub system: RegisterSystem,
    /// `(weight, amplitudes)`; the represented state is `Σ w |v⟩⟨v| / ‖v‖²`.
    pub branches: Vec<(f64, Vec<C64>)>,
}

impl BranchEnsemble {
    /// `Σ_i w_i Tr_rest |v_i⟩⟨v_i| / ‖v_i‖²` on `keep`, in system order.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let sys = self.system.restrict(keep)?;
        let mut m = Matrix::zeros(sys.dim(), sys.dim());
        for (w, v) in &self.branches {
            let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if nrm <= 0.0 || *w <= 0.0 {
                continue;
            }
            let part = StateVector::from_parts(self.system.clone(), v.clone()).reduced(keep)?;
            m = &m + &part.matrix().scale(w / nrm);
        }
        Ok(DensityOperator::from_parts(sys, m, true))
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|(w, _)| w).sum()
    }
}

/// Inputs Bob's decoder is judged against.
#[derive(Clone, Debug)]
pub struct DecoderSetup {
    /// `|Φ⟩` on `R, A, B, C`.
    pub target: StateVector,
    pub sigma_c: DensityOperator,
    /// Diagonal test on `B ⊗ C`.
    pub test: Matrix,
}

#[derive(Clone, Debug)]
pub struct DecoderRun {
    pub transcript: ProtocolTranscript,
    /// `P(outcome k)` for `k = 1..b`, then the no-fire outcome.
    pub outcome_probabilities: Vec<f64>,
    /// State on `R, A, B, C` (copy `C_1` relabelled `C`).
    pub output: DensityOperator,
    pub distance: f64,
    /// `((b−1)α + β)^{1/4}`
    pub decoder_bound: f64,
}

fn swap_matrix(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            m[(y * d + x, x * d + y)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// Square roots of a diagonal `0 ⪯ Π ⪯ I` and of `I − Π`.
fn diagonal_kraus(test: &Matrix) -> (Matrix, Matrix) {
    let w = test.real_diagonal();
    let pass: Vec<f64> = w.iter().map(|x| libm::sqrt(x.clamp(0.0, 1.0))).collect();
    let fail: Vec<f64> = w
        .iter()
        .map(|x| libm::sqrt((1.0 - x).clamp(0.0, 1.0)))
        .collect();
    (Matrix::diag_real(&pass), Matrix::diag_real(&fail))
}

struct DecoderOutcome {
    output: DensityOperator,
    probabilities: Vec<f64>,
}

/// Bob's sequential scan over `C_1 … C_b`, applied branch by branch.
fn run_decoder(
    ens: &BranchEnsemble,
    b: usize,
    test: &Matrix,
    target_system: &RegisterSystem,
) -> Result<DecoderOutcome> {
    let d_c = ens.system.dim_of("C_1")?;
    let (pass, fail) = diagonal_kraus(test);
    let swap = swap_matrix(d_c);
    let keep = ["R", "A", "B", "C_1"];
    let keep_sys = ens.system.restrict(&keep)?;
    let mut acc = Matrix::zeros(keep_sys.dim(), keep_sys.dim());
    let mut probabilities = alloc::vec![0.0; b + 1];
    let mut add = |w: f64, v: Vec<C64>, slot: usize, acc: &mut Matrix| -> Result<()> {
        let mass: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        probabilities[slot] += w * mass;
        if mass > 0.0 {
            let part = StateVector::from_parts(ens.system.clone(), v).reduced(&keep)?;
            *acc = &*acc + &part.matrix().scale(w);
        }
        Ok(())
    };
    for (w, v) in &ens.branches {
        let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if nrm <= 0.0 || *w <= 0.0 {
            continue;
        }
        let scale = 1.0 / libm::sqrt(nrm);
        let mut remaining: Vec<C64> = v.iter().map(|z| z * scale).collect();
        for k in 1..=b {
            let ck = copy_label("C", k);
            let mut hit = apply_local(&ens.system, &remaining, &pass, &["B", &ck])?;
            if k > 1 {
                hit = apply_local(&ens.system, &hit, &swap, &["C_1", &ck])?;
            }
            add(*w, hit, k - 1, &mut acc)?;
            remaining = apply_local(&ens.system, &remaining, &fail, &["B", &ck])?;
        }
        add(*w, remaining, b, &mut acc)?;
    }
    let total = ens.total_weight();
    let out = DensityOperator::from_parts(keep_sys, acc.scale(1.0 / total), true)
        .reorder(&keep)?
        .relabel("C_1", "C")?
        .with_system(target_system.clone())?;
    for p in &mut probabilities {
        *p /= total;
    }
    Ok(DecoderOutcome {
        output: out,
        probabilities,
    })
}

fn distance_to_pure(rho: &DensityOperator, psi: &StateVector) -> f64 {
    let v = psi.amplitudes();
    let f2 = rho
        .matrix()
        .mul_vec(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (b.conj() * a).re)
        .sum::<f64>();
    libm::sqrt((1.0 - f2.clamp(0.0, 1.0)).max(0.0))
}

fn decoder_guarantee(b: usize, alpha: f64, beta: f64) -> f64 {
    libm::pow(((b.saturating_sub(1)) as f64 * alpha + beta).max(0.0), 0.25)
}

fn decoder_alpha_beta(setup: &DecoderSetup) -> Result<(f64, f64)> {
    let rho_bc = setup.target.reduced(&["B", "C"])?;
    let product = tensor(&setup.target.reduced(&["B"])?, &setup.sigma_c)?;
    let alpha = setup.test.trace_product(product.matrix()).re;
    let beta = 1.0 - setup.test.trace_product(rho_bc.matrix()).re;
    Ok((alpha.max(0.0), beta.max(0.0)))
}

fn check_free_test(test: &Matrix) -> Result<()> {
    let complement = &Matrix::identity(test.rows()) - test;
    if !Coherence.is_free_measurement_operator(test)
        || !Coherence.is_free_measurement_operator(&complement)
    {
        return Err(Error::NotFree(
            "decoder test must be a diagonal operator between 0 and I".into(),
        ));
    }
    Ok(())
}

fn record_decoder_steps(t: &mut ProtocolTranscript, b: usize, test_free: bool, swap_free: bool) {
    for k in 1..=b {
        t.step(
            Actor::Bob,
            format!("measure {{Pi, I - Pi}} on (B, C_{k})"),
            ResourceCounters::default(),
            Some(test_free),
        );
        if k > 1 {
            t.step(
                Actor::Bob,
                format!("on success swap C_{k} with C_1"),
                ResourceCounters::default(),
                Some(swap_free),
            );
        }
    }
}

fn swap_is_free(d: usize) -> Result<bool> {
    let sys = RegisterSystem::from_pairs(&[("x", d), ("y", d)])?;
    Ok(is_incoherent_channel(&KrausChannel::unitary(sys, swap_matrix(d))?).incoherent)
}

/// Bob's scan on a block `C_1 … C_b` (measure `{Π, I − Π}` on `B C_k` for
/// `k = 1..b`, swapping `C_k` into `C_1` on the first hit), judged on the
/// output `R A B C_1`. Errors unless the distance to `Φ` is at most
/// `((b−1)α + β)^{1/4}`, `α = Tr(Π Φ_B ⊗ σ_C)`, `β = 1 − Tr(Π Φ_BC)`.
pub fn qsr_decoder_p1(mu: &BranchEnsemble, b: usize, setup: &DecoderSetup) -> Result<DecoderRun> {
    if b == 0 {
        return Err(Error::InvalidParameter(
            "block length must be positive".into(),
        ));
    }
    check_free_test(&setup.test)?;
    let target = QsrInstance::pad_roles(&setup.target)?;
    let d_bc = target.system().dim_of_all(&["B", "C"])?;
    if setup.test.rows() != d_bc {
        return Err(Error::DimensionMismatch {
            expected: d_bc,
            found: setup.test.rows(),
        });
    }
    for k in 1..=b {
        mu.system.position(&copy_label("C", k))?;
    }
    let run = run_decoder(mu, b, &setup.test, target.system())?;
    let distance = distance_to_pure(&run.output, &target);
    let (alpha, beta) = decoder_alpha_beta(&DecoderSetup {
        target: target.clone(),
        ..setup.clone()
    })?;
    let bound = decoder_guarantee(b, alpha, beta);

    let mut t = ProtocolTranscript::new("qsr-decoder");
    record_decoder_steps(&mut t, b, true, swap_is_free(target.system().dim_of("C")?)?);
    t.set_fidelity(libm::sqrt(1.0 - distance * distance));
    t.set_metric("distance", distance);
    t.set_metric("decoder_bound", bound);
    t.set_metric("failure_probability", run.probabilities[b]);
    if distance > bound + BOUND_SLACK {
        return Err(Error::BoundViolated {
            what: "decoder distance".into(),
            measured: distance,
            bound,
        });
    }
    Ok(DecoderRun {
        transcript: t,
        outcome_probabilities: run.probabilities,
        output: run.output,
        distance,
        decoder_bound: bound,
    })
}

/// Mixed-radix flat index (most significant first).
fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &r)| acc * r + d)
}

fn decode(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(dims).rev() {
        *slot = index % r;
        index /= r;
    }
}

/// Registers and amplitudes of `ξ` (on `S ⊗ X`) and `μ` (on `S ⊗ Y`) with
/// `S = R B C_1…C_n`, `X = A C L_1…L_n`, `Y = J A L_1…L_n`.
struct Purifications {
    s_dims: Vec<usize>,
    y_sys: RegisterSystem,
    s_sys: RegisterSystem,
    xi: Matrix,
    mu: Matrix,
}

fn purifications(inst: &QsrInstance, n: usize) -> Result<Purifications> {
    let phi = inst.psi.amplitudes();
    let (dr, da, db, dc) = (inst.dim("R"), inst.dim("A"), inst.dim("B"), inst.dim("C"));
    let support = inst.sigma_support();
    let d_l = support.len();
    let sigma = inst.sigma_c.matrix().real_diagonal();
    let mut slot = alloc::vec![usize::MAX; dc];
    for (l, &c) in support.iter().enumerate() {
        slot[c] = l;
    }
    let root: Vec<f64> = sigma.iter().map(|&s| libm::sqrt(s.max(0.0))).collect();
    let phi_at = |r: usize, a: usize, b: usize, c: usize| phi[((r * da + a) * db + b) * dc + c];

    let mut s_dims = alloc::vec![dr, db];
    s_dims.extend(core::iter::repeat(dc).take(n));
    let mut x_dims = alloc::vec![da, dc];
    x_dims.extend(core::iter::repeat(d_l).take(n));
    let d_j = n.max(dc);
    let mut y_dims = alloc::vec![d_j, da];
    y_dims.extend(core::iter::repeat(d_l).take(n));
    let (ds, dx, dy) = (
        s_dims.iter().product(),
        x_dims.iter().product::<usize>(),
        y_dims.iter().product::<usize>(),
    );

    let mut xi = Matrix::zeros(ds, dx);
    let mut mu = Matrix::zeros(ds, dy);
    let inv_sqrt_n = 1.0 / libm::sqrt(n as f64);
    let mut s_digits = alloc::vec![0usize; n + 2];
    let mut x_digits = alloc::vec![0usize; n + 2];
    let mut y_digits = alloc::vec![0usize; n + 2];
    for s in 0..ds {
        decode(s, &s_dims, &mut s_digits);
        let (r, b) = (s_digits[0], s_digits[1]);
        let copies = &s_digits[2..];
        let outside: Vec<usize> = (0..n).filter(|&i| slot[copies[i]] == usize::MAX).collect();
        let weight_except = |skip: Option<usize>| -> f64 {
            (0..n)
                .filter(|&i| Some(i) != skip)
                .map(|i| root[copies[i]])
                .product()
        };
        // ξ: every copy must lie in supp σ.
        if outside.is_empty() {
            let w = weight_except(None);
            for (i, &c) in copies.iter().enumerate() {
                x_digits[2 + i] = slot[c];
            }
            for a in 0..da {
                for c in 0..dc {
                    x_digits[0] = a;
                    x_digits[1] = c;
                    xi[(s, encode(&x_digits, &x_dims))] = phi_at(r, a, b, c) * w;
                }
            }
        }
        // μ: copy j carries Φ, all others must lie in supp σ.
        for j in 0..n {
            if outside.iter().any(|&i| i != j) {
                continue;
            }
            let w = weight_except(Some(j)) * inv_sqrt_n;
            for (i, &c) in copies.iter().enumerate() {
                y_digits[2 + i] = if i == j { 0 } else { slot[c] };
            }
            y_digits[0] = j;
            for a in 0..da {
                y_digits[1] = a;
                mu[(s, encode(&y_digits, &y_dims))] = phi_at(r, a, b, copies[j]) * w;
            }
        }
    }

    let mut s_regs = alloc::vec![
        Register {
            label: "R".into(),
            dim: dr
        },
        Register {
            label: "B".into(),
            dim: db
        }
    ];
    let mut y_regs = alloc::vec![
        Register {
            label: "J".into(),
            dim: d_j
        },
        Register {
            label: "A".into(),
            dim: da
        }
    ];
    for i in 1..=n {
        s_regs.push(Register {
            label: copy_label("C", i),
            dim: dc,
        });
        y_regs.push(Register {
            label: copy_label("L", i),
            dim: d_l,
        });
    }
    Ok(Purifications {
        s_dims,
        s_sys: RegisterSystem::new(s_regs)?,
        y_sys: RegisterSystem::new(y_regs)?,
        xi,
        mu,
    })
}

/// Alice's readout of `J` as a classical mixture, followed by Bob moving
/// block `⌊j/b⌋` into `C_1…C_b` (the last block may be short).
fn measure_and_align(
    system: &RegisterSystem,
    state: &[C64],
    n: usize,
    b: usize,
) -> Result<(BranchEnsemble, f64)> {
    let rest_labels = system.complement(&["J"])?;
    let rest = system.select(&rest_labels)?;
    let sp = system.split(&["J"])?;
    let d_c = rest.dim_of("C_1")?;
    let swap = swap_matrix(d_c);
    let mut branches = Vec::with_capacity(n);
    let mut stray = 0.0;
    for j in 0..sp.d_sel() {
        let mut v: Vec<C64> = (0..sp.d_rest()).map(|r| state[sp.index(j, r)]).collect();
        let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if w <= 0.0 {
            continue;
        }
        if j >= n {
            // Padding outcomes carry no message; Bob keeps block 0.
            stray += w;
        } else {
            let block = j / b;
            let len = b.min(n - block * b);
            for i in 1..=len {
                let from = copy_label("C", block * b + i);
                if block > 0 {
                    v = apply_local(&rest, &v, &swap, &[&copy_label("C", i), &from])?;
                }
            }
        }
        branches.push((w, v));
    }
    Ok((
        BranchEnsemble {
            system: rest,
            branches,
        },
        stray,
    ))
}

/// The decoder's input: `μ` on `n = b` copies after the readout of `J`, so copy
/// `j` of `C_1…C_b` carries `Φ` with probability `1/b`.
pub fn decoder_input(instance: &QsrInstance, b: usize) -> Result<BranchEnsemble> {
    if b == 0 {
        return Err(Error::InvalidParameter(
            "block length must be positive".into(),
        ));
    }
    let need = instance.required_amplitudes(b);
    if need > instance.budget as u128 {
        return Err(Error::BudgetExceeded {
            required: usize::try_from(need).unwrap_or(usize::MAX),
            budget: instance.budget,
        });
    }
    let p = purifications(instance, b)?;
    let system = p.s_sys.concat(&p.y_sys)?;
    Ok(measure_and_align(&system, p.mu.as_slice(), b, b)?.0)
}

#[derive(Clone, Debug)]
pub struct QsrRun {
    pub transcript: ProtocolTranscript,
    pub parameters: QsrParameters,
    /// `P(Φ', Φ)` for the protocol output `Φ'`.
    pub final_distance: f64,
    /// `3ε₁ + ε₂ + γ`
    pub guaranteed_distance: f64,
    /// `ε₁ + ε₂ + γ`: the same chain with unsmoothed `k`, where the convex
    /// split contributes `ε₁` instead of `3ε₁`.
    pub chain_bound: f64,
    /// Distance reached when the decoder runs on `μ` itself.
    pub p1_distance: f64,
    /// `((b−1)α + β)^{1/4}`
    pub decoder_bound: f64,
    pub output: DensityOperator,
}

/// Full protocol: builds `ξ` and `μ`, applies Alice's Uhlmann isometry,
/// reads out `J`, sends `⌈log₂(n/b)⌉` cobits, and runs Bob's decoder. With
/// un-overridden parameters the output distance must not exceed
/// `3ε₁ + ε₂ + γ`.
pub fn qsr_full(instance: &QsrInstance) -> Result<QsrRun> {
    let params = instance.parameters()?;
    let (n, b) = (params.n, params.b);
    let need = instance.required_amplitudes(n);
    check_budget(usize::try_from(need).unwrap_or(usize::MAX), instance.budget)?;

    let p = purifications(instance, n)?;
    let (v, overlap) = uhlmann_parts(&p.xi, &p.mu)?;
    let rotated = p.xi.matmul(&v.transpose());
    let system = p.s_sys.concat(&p.y_sys)?;
    debug_assert_eq!(
        p.s_dims.iter().product::<usize>() * p.y_sys.dim(),
        system.dim()
    );

    let (ens, stray) = measure_and_align(&system, rotated.as_slice(), n, b)?;
    let run = run_decoder(&ens, b, &params.test, instance.psi.system())?;
    let final_distance = distance_to_pure(&run.output, &instance.psi);

    let (ideal, _) = measure_and_align(&system, p.mu.as_slice(), n, b)?;
    let ideal_run = run_decoder(&ideal, b, &params.test, instance.psi.system())?;
    let p1_distance = distance_to_pure(&ideal_run.output, &instance.psi);

    let guaranteed_distance = 3.0 * instance.eps1 + instance.eps2 + instance.gamma;
    let chain_bound = instance.eps1 + instance.eps2 + instance.gamma;
    let decoder_bound = decoder_guarantee(b, params.alpha, params.beta);

    let mut t = ProtocolTranscript::new("qsr");
    t.step(
        Actor::Referee,
        format!("R A B C hold Phi; Alice and Bob share {n} purified copies of sigma_C on L_i C_i"),
        ResourceCounters::default(),
        None,
    );
    t.step(
        Actor::Alice,
        "apply Uhlmann isometry A C L_1..L_n -> J A L_1..L_n",
        ResourceCounters::default(),
        None,
    );
    t.step(
        Actor::Alice,
        format!(
            "measure J and send block index floor((j-1)/{b}) over {} cobits",
            params.cobits
        ),
        ResourceCounters {
            cobits_sent: u64::from(params.cobits),
            ..Default::default()
        },
        None,
    );
    let swap_free = swap_is_free(instance.dim("C"))?;
    t.step(
        Actor::Bob,
        "swap the signalled block into C_1..C_b",
        ResourceCounters::default(),
        Some(swap_free),
    );
    let test_free = check_free_test(&params.test).is_ok();
    record_decoder_steps(&mut t, b, test_free, swap_free);
    t.set_fidelity(libm::sqrt(1.0 - final_distance * final_distance));

    let d_f = if params.d_f.finite {
        params.d_f.value
    } else {
        f64::INFINITY
    };
    for (name, value) in [
        ("k", params.k),
        ("n", n as f64),
        ("b", b as f64),
        ("b_clamped", f64::from(u8::from(params.b_clamped))),
        ("cobits", f64::from(params.cobits)),
        ("d_f", d_f),
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("convex_split_fidelity", overlap.min(1.0)),
        ("final_distance", final_distance),
        ("guaranteed_distance", guaranteed_distance),
        ("chain_bound", chain_bound),
        ("p1_distance", p1_distance),
        ("decoder_bound", decoder_bound),
        ("failure_probability", run.probabilities[b]),
        ("padding_weight", stray),
        (
            "shared_ebits",
            n as f64 * crate::entropy::von_neumann_entropy(&instance.sigma_c),
        ),
    ] {
        t.set_metric(name, value);
    }
    if params.b_clamped {
        t.notes.push(format!("block length clamped to n = {n}"));
    }
    if instance.is_overridden() {
        t.notes
            .push("parameters overridden: bounds reported, not enforced".into());
    }
    if !instance.is_overridden() && final_distance > guaranteed_distance + BOUND_SLACK {
        return Err(Error::BoundViolated {
            what: "redistribution distance".into(),
            measured: final_distance,
            bound: guaranteed_distance,
        });
    }
    Ok(QsrRun {
        transcript: t,
        parameters: params,
        final_distance,
        guaranteed_distance,
        chain_bound,
        p1_distance,
        decoder_bound,
        output: run.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::ZERO;

    fn state(labels: &[&str], amps: &[(usize, f64)]) -> StateVector {
        let sys = RegisterSystem::qubits(labels).unwrap();
        let mut v = alloc::vec![ZERO; sys.dim()];
        for &(i, a) in amps {
            v[i] = C64::new(a, 0.0);
        }
        StateVector::new(sys, v).unwrap()
    }

    /// `|Φ+⟩_RB ⊗ (√p|00⟩ + √(1−p)|11⟩)_AC`.
    fn bell_with_correlated_c(p: f64) -> StateVector {
        let rb = state(
            &["R", "B"],
            &[
                (0, core::f64::consts::FRAC_1_SQRT_2),
                (3, core::f64::consts::FRAC_1_SQRT_2),
            ],
        );
        let ac = state(&["A", "C"], &[(0, libm::sqrt(p)), (3, libm::sqrt(1.0 - p))]);
        rb.tensor(&ac).unwrap().reorder(&ROLES).unwrap()
    }

    /// `|Φ+⟩_RB ⊗ |+⟩_C`.
    fn bell_with_plus_c() -> StateVector {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let rb = state(&["R", "B"], &[(0, h), (3, h)]);
        let c = state(&["C"], &[(0, h), (1, h)]);
        rb.tensor(&c).unwrap()
    }

    #[test]
    fn uncorrelated_c_needs_four_copies_and_stays_close() {
        let inst = QsrInstance::new(bell_with_correlated_c(0.3), 0.5, 0.1, 0.1).unwrap();
        let run = qsr_full(&inst).unwrap();
        let p = &run.parameters;
        assert!(p.k.abs() < 1e-9);
        assert_eq!((p.n, p.b, p.cobits), (4, 1, 2));
        assert_eq!(run.transcript.counters.cobits_sent, 2);
        assert!(run.final_distance <= run.chain_bound);
        assert!(run.p1_distance <= run.decoder_bound + BOUND_SLACK);
        assert!(run.transcript.all_restricted_steps_free());
        assert!((run.output.matrix().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_c_reaches_chain_bound() {
        let inst = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        let run = qsr_full(&inst).unwrap();
        assert!((run.parameters.k - 1.0).abs() < 1e-9);
        assert_eq!(run.parameters.n, 4);
        assert!(run.final_distance <= run.chain_bound + BOUND_SLACK);
    }

    #[test]
    fn cobits_cover_the_block_count() {
        let base = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        for (n, b, cobits, clamped) in [
            (4, 2, 1, false),
            (4, 3, 1, false),
            (5, 2, 2, false),
            (3, 8, 0, true),
        ] {
            let p = base
                .clone()
                .with_n_override(n)
                .unwrap()
                .with_b_override(b)
                .unwrap()
                .parameters()
                .unwrap();
            assert_eq!((p.cobits, p.b_clamped), (cobits, clamped), "n={n} b={b}");
            assert!(p.b << p.cobits >= n);
        }
    }

    #[test]
    fn more_copies_do_not_hurt_the_split() {
        let base = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        let mut last = 0.0;
        for n in 1..=4 {
            let run = qsr_full(&base.clone().with_n_override(n).unwrap()).unwrap();
            let f = run.transcript.metric("convex_split_fidelity").unwrap();
            assert!(f >= last - 1e-9, "n={n}: {f} < {last}");
            last = f;
        }
    }

    #[test]
    fn accepting_test_with_one_copy_returns_the_input() {
        let inst = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        let mu = decoder_input(&inst, 1).unwrap();
        let setup = DecoderSetup {
            target: inst.psi().clone(),
            sigma_c: inst.sigma_c().clone(),
            test: Matrix::identity(4),
        };
        let run = qsr_decoder_p1(&mu, 1, &setup).unwrap();
        assert!(run.distance < 1e-7);
        assert!((run.outcome_probabilities[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_test_is_rejected() {
        let inst = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        let mu = decoder_input(&inst, 2).unwrap();
        let mut test = Matrix::identity(4).scale(0.5);
        test[(0, 1)] = C64::new(0.1, 0.0);
        test[(1, 0)] = C64::new(0.1, 0.0);
        let setup = DecoderSetup {
            target: inst.psi().clone(),
            sigma_c: inst.sigma_c().clone(),
            test,
        };
        assert!(matches!(
            qsr_decoder_p1(&mu, 2, &setup),
            Err(Error::NotFree(_))
        ));
    }

    #[test]
    fn small_budget_is_rejected() {
        let inst = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1)
            .unwrap()
            .with_budget(256);
        assert!(matches!(qsr_full(&inst), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn invalid_sigma_is_rejected() {
        let inst = QsrInstance::new(bell_with_plus_c(), 0.8, 0.1, 0.1).unwrap();
        let c = RegisterSystem::qubits(&["C"]).unwrap();
        let pure = DensityOperator::from_diagonal(c.clone(), &[1.0, 0.0]).unwrap();
        assert!(matches!(
            inst.clone().with_sigma(pure),
            Err(Error::SupportViolation)
        ));
        let plus = state(
            &["C"],
            &[
                (0, core::f64::consts::FRAC_1_SQRT_2),
                (1, core::f64::consts::FRAC_1_SQRT_2),
            ],
        )
        .to_density();
        assert!(matches!(inst.with_sigma(plus), Err(Error::NotFree(_))));
    }

    #[test]
    fn epsilons_outside_unit_interval_are_rejected() {
        assert!(QsrInstance::new(bell_with_plus_c(), 0.0, 0.1, 0.1).is_err());
        assert!(QsrInstance::new(bell_with_plus_c(), 0.5, 1.0, 0.1).is_err());
    }
}
