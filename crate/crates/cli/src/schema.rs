//! The documented configuration schema, printed by `show-config-schema`.

pub const SCHEMA: &str = r#"# Configuration schema (TOML). Unknown keys are errors.
# CLI flags (--nu, --t-end, --seed, --output-dir, --quiet, --strict)
# override the corresponding keys.

mode = "linear-single-k"   # required: linear-single-k | linear-all-k |
                           #           nonlinear | operator-audit
nu = 1e-4                  # required: viscosity, > 0
t_end = 100.0              # required: time horizon, > 0
dt = 0.05                  # optional fixed step; omitted => cfl * advective bound,
                           # then adjusted so t_end is an integer number of steps
cfl = 0.5                  # CFL factor in (0, 1], used when dt is absent
sample_interval = 0.5      # diagnostic sampling period (time units), > 0
seed = 0                   # RNG seed; identical config+seed => identical outputs
output_dir = "runs/out"    # artifact directory (created if missing)
strict = false             # exit 4 when a budget verification fails
quiet = false              # suppress progress lines
divergence_factor = 1e6    # abort when energy exceeds this multiple of its
                           # initial value; run is flagged "diverged" (exit 3)
departed_factor = 2.0      # sweep-epsilon classification boundary
disable_transport = false  # verification hook: drop ikU / ikU'' terms so the
                           # evolution is pure diffusion
per_k_csv = false          # nonlinear runs: also emit the per-mode long CSV

[grid]
n_x = 32                   # x collocation points (FFT size); retained band is
                           # |k| <= floor(dealias_fraction * n_x / 2)
n_y = 128                  # wall-normal sine modes / interior nodes, >= 8
dealias_fraction = 0.6666666666666666   # 2/3 rule in both directions

[ledger]                   # energy-functional constants; defaults follow the
                           # worked instance for the given k0
k0 = 64.0                  # >= 32
# c_alpha = 5.55e-17       # default k0^-9
# c_beta = 1.45e-11        # default k0^-6
# c_tau = 2.44e-4          # default 1/(64 k0)
# delta_star = 0.015625    # default 1/64
# delta0 = 2.98e-8         # default (64 k0)^-2 / 2
# delta1 = 0.1             # perturbation-size threshold coefficient
# m = 0.75                 # mode-weight exponent; values outside (2/3, 1) warn
# delta = 0.0              # |k|^{-delta} damping-weight exponent

[shear]
preset = "zero"            # "zero" | "single_mode n amp" | "random_h4 seed amp"
# file = "w.txt"           # one-column W values on the nodes; overrides preset

[perturbation]
preset = "zero"            # "zero" | "single_mode k n amp"
                           # | "random_band seed k_band n_band eps"
# epsilon_over_sqrt_nu = 0.05   # rescale so the anisotropic norm is c*sqrt(nu)

[linear]
k = 1                      # mode for linear-single-k (nonzero, within band)
ks = [1, 2, 4]             # modes for linear-all-k

[audit]
k_min = 1                  # operator-audit wavenumber range
k_max = 64
"#;
