// chebprop: file-driven propagation and the numerical studies (convergence,
// runtime scaling, Chebyshev order table).
//
// Exit codes: 0 ok, 2 input error, 3 step too large for the Chebyshev plan, 4 internal.

#include <chebprop/problem_file.hpp>
#include <chebprop/studies.hpp>

#include <CLI11.hpp>

#include <exception>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace chebprop;

constexpr int exit_input     = 2;
constexpr int exit_numerical = 3;
constexpr int exit_internal  = 4;

int exit_code_for(ErrorCode code) {
    return code == ErrorCode::step_too_large ? exit_numerical : exit_input;
}

void emit(const std::string &out_path, const std::string &content) {
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        write_text_file(out_path, content);
}

struct PropagateArgs {
    std::string manifest;
    bool magnus = false;
    std::string quadrature;
    std::string precision;
    int mmax = 0;
    std::string out;
    bool all     = false;
    bool checked = false;
};

int cmd_propagate(const PropagateArgs &a) {
    const Problem problem = load_problem(a.manifest);
    IntegratorConfig cfg;
    cfg.precision = !a.precision.empty() ? parse_precision(a.precision) : problem.precision.value_or(Precision::fp64);
    cfg.checked   = a.checked;

    const Quadrature quad =
        !a.quadrature.empty() ? parse_quadrature(a.quadrature) : (a.magnus ? Quadrature::simpson : Quadrature::midpoint);
    Integrator integrator(cfg);
    integrator.set_hamiltonian(problem.system, a.magnus, quad);
    if (a.mmax != 0)
        integrator.set_m_max_override(a.mmax);

    const PropagatorResult result = integrator.equiprop(problem.amplitudes);
    std::vector<Matrix<double>> cumulative;
    if (a.all)
        cumulative = integrator.equiprop_all(problem.amplitudes);

    std::ostringstream summary;
    summary << "slices=" << result.slice_count << " m_max=" << result.plan.m_max << std::setprecision(6)
            << " beta=" << result.plan.beta << " eps_predicted=" << result.plan.predicted_error
            << " precision=" << to_string(cfg.precision) << " mode="
            << (a.magnus ? "magnus" : std::string(to_string(quad))) << '\n';
    // Keep stdout clean when it carries the JSON.
    (a.out.empty() || a.out == "-" ? std::cerr : std::cout) << summary.str();
    emit(a.out, propagator_to_json(result, a.all ? &cumulative : nullptr) + "\n");
    return 0;
}

struct ConvergeArgs {
    std::vector<std::size_t> steps;
    std::size_t min_pts = 10, max_pts = 1'000'000;
    int per_decade      = 4;
    bool magnus         = false;
    std::string quadrature = "midpoint";
    std::string precision  = "fp64";
    std::string out;
    DrivenQubit qubit;
    bool phase_align            = false;
    std::size_t reference_steps = 10'000'000;
};

int cmd_converge(const ConvergeArgs &a) {
    PropagationMode mode;
    mode.magnus     = a.magnus;
    mode.quadrature = a.magnus ? Quadrature::simpson : parse_quadrature(a.quadrature);
    mode.precision  = parse_precision(a.precision);
    const bool odd  = mode.quadrature == Quadrature::simpson;

    if (a.reference_steps > 0) {
        const double agreement =
            max_abs_diff(driven_qubit_reference(a.qubit, a.reference_steps), driven_qubit_exact(a.qubit, a.qubit.duration));
        std::cout << "# analytic oracle vs " << a.reference_steps << "-step reference: " << std::scientific
                  << std::setprecision(3) << agreement << '\n';
        if (agreement > 1e-8) {
            std::cerr << "analytic propagator disagrees with the fine-step reference (" << agreement << " > 1e-8)\n";
            return exit_internal;
        }
    }

    std::vector<std::size_t> pts = a.steps;
    if (pts.empty()) {
        pts = log_spaced_counts(a.min_pts, a.max_pts, a.per_decade, odd);
    } else if (odd) {
        for (auto &p : pts)
            p += (p % 2 == 0);
    }
    const auto series = convergence_sweep(a.qubit, pts, mode, a.phase_align);
    const SlopeFit fit = fit_convergence_slope(series);

    std::ostringstream csv;
    csv << "pts,slices,error,unitarity,m_max\n" << std::setprecision(17);
    for (const auto &p : series)
        csv << p.pts << ',' << p.slices << ',' << p.error << ',' << p.unitarity << ',' << p.m_max << '\n';
    emit(a.out, csv.str());

    std::ostream &info = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    info << "# mode=" << describe(mode) << " error metric: max_ij |U - U_exact|_ij";
    if (fit.valid)
        info << " slope=" << std::fixed << std::setprecision(3) << fit.slope << " window=[" << series[fit.first].pts
             << ", " << series[fit.last].pts << "] decades=" << std::setprecision(2) << fit.decades;
    else
        info << " slope=n/a";
    info << '\n';
    return 0;
}

struct BenchArgs {
    std::vector<std::size_t> dims  = {2, 8};
    std::vector<std::size_t> steps = {1000, 3162, 10000, 31623, 100000};
    std::string precision          = "fp64";
    int repeats                    = 5;
    std::uint64_t seed             = 42;
    std::string out;
};

int cmd_bench(const BenchArgs &a) {
    const auto rows = run_bench(a.dims, a.steps, parse_precision(a.precision), a.repeats, a.seed);
    std::ostringstream csv;
    csv << "dim,pts,seconds\n" << std::setprecision(9);
    for (const auto &r : rows)
        csv << r.dim << ',' << r.pts << ',' << r.seconds << '\n';
    emit(a.out, csv.str());
    return 0;
}

int cmd_table1(const std::string &precision, const std::string &out) {
    std::string text;
    if (precision.empty() || precision == "both") {
        text = format_table1();
    } else {
        const Precision p[] = {parse_precision(precision)};
        text = format_table1(p);
    }
    emit(out, text);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Batched Chebyshev propagation of sliced time-dependent Hamiltonians"};
    app.require_subcommand(1);

    PropagateArgs prop;
    auto *propagate = app.add_subcommand("propagate", "Propagate a problem manifest and write the propagator as JSON");
    propagate->add_option("manifest", prop.manifest, "Problem manifest (JSON)")->required();
    propagate->add_flag("--magnus", prop.magnus, "Fourth-order Magnus mode (needs simpson sampling)");
    propagate->add_option("--quadrature", prop.quadrature, "midpoint | simpson");
    propagate->add_option("--precision", prop.precision, "fp32 | fp64 (default: manifest, else fp64)");
    propagate->add_option("--mmax", prop.mmax, "Fixed Chebyshev order (odd, 3..25)");
    propagate->add_option("--out", prop.out, "Output file (default stdout)");
    propagate->add_flag("--all", prop.all, "Also write the cumulative propagators");
    propagate->add_flag("--checked", prop.checked, "Validate Hermiticity of every slice exponent");

    ConvergeArgs conv;
    auto *converge = app.add_subcommand("converge", "Convergence of the driven qubit against its analytic propagator");
    converge->add_option("--steps-list", conv.steps, "Explicit sample counts")->delimiter(',');
    converge->add_option("--min-pts", conv.min_pts, "Smallest sample count of the log sweep");
    converge->add_option("--max-pts", conv.max_pts, "Largest sample count of the log sweep");
    converge->add_option("--per-decade", conv.per_decade, "Sweep points per decade");
    converge->add_flag("--magnus", conv.magnus, "Fourth-order Magnus mode");
    converge->add_option("--quadrature", conv.quadrature, "midpoint | simpson");
    converge->add_option("--precision", conv.precision, "fp32 | fp64");
    converge->add_option("--out", conv.out, "CSV output file (default stdout)");
    converge->add_option("--omega0", conv.qubit.omega0, "Qubit splitting");
    converge->add_option("--omega1", conv.qubit.omega1, "Drive amplitude");
    converge->add_option("--omega-rf", conv.qubit.omega_rf, "Drive frequency");
    converge->add_option("--duration", conv.qubit.duration, "Final time");
    converge->add_flag("--phase-align", conv.phase_align, "Remove the global phase before comparing");
    converge->add_option("--reference-steps", conv.reference_steps,
                         "Steps of the startup oracle check (0 skips it)");

    BenchArgs bench;
    auto *bench_cmd = app.add_subcommand("bench", "Time propagation over matrix sizes and sample counts");
    bench_cmd->add_option("--dims", bench.dims, "Matrix dimensions")->delimiter(',');
    bench_cmd->add_option("--steps", bench.steps, "Sample counts")->delimiter(',');
    bench_cmd->add_option("--precision", bench.precision, "fp32 | fp64");
    bench_cmd->add_option("--repeats", bench.repeats, "Timed repeats (median reported)");
    bench_cmd->add_option("--seed", bench.seed, "Random seed for the systems");
    bench_cmd->add_option("--out", bench.out, "CSV output file (default stdout)");

    std::string table_precision = "both", table_out;
    auto *table1 = app.add_subcommand("table1", "Largest exponent norm per Chebyshev order");
    table1->add_option("--precision", table_precision, "fp32 | fp64 | both");
    table1->add_option("--out", table_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_input;
    }

    try {
        if (*propagate)
            return cmd_propagate(prop);
        if (*converge)
            return cmd_converge(conv);
        if (*bench_cmd)
            return cmd_bench(bench);
        if (*table1)
            return cmd_table1(table_precision, table_out);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_internal;
}
