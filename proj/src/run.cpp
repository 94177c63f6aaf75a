#include "spectralflow/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "spectralflow/csvio.hpp"
#include "spectralflow/laws.hpp"
#include "spectralflow/parallel.hpp"
#include "spectralflow/report.hpp"
#include "spectralflow/spectra.hpp"
#include "spectralflow/stieltjes.hpp"

namespace spectralflow {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void note(bool quiet, const std::string& line) {
    if (!quiet) std::printf("%s\n", line.c_str());
}

bool complex_variant(EnsembleVariant v) {
    return v == EnsembleVariant::wigner_complex || v == EnsembleVariant::wishart_complex;
}

bool wishart_variant(EnsembleVariant v) {
    return v == EnsembleVariant::wishart_real || v == EnsembleVariant::wishart_complex;
}

EnsembleSpec spec_for(const RunConfig& cfg, int replica) {
    EnsembleSpec spec = cfg.ensemble;
    spec.seed = cfg.seed;
    spec.replica = static_cast<std::uint32_t>(replica);
    spec.workers = cfg.workers;
    return spec;
}

// Entry mean / dispersion per snapshot time. Complex variants use the 2-D
// modulus dispersion (sqrt(2) times the per-component value for fbm), which
// is exactly the scale the limit laws want.
struct MomentTable {
    std::vector<double> t, m, d;
    std::string method;
    std::int64_t n_mc = 0;
};

MomentTable resolve_moments(const EnsembleSpec& spec, int workers) {
    MomentTable tab;
    const bool cx = complex_variant(spec.variant);
    if (spec.coeffs_name == "fbm") {
        tab.method = "exact";
        const double var0 =
            spec.x0.kind == X0Sampler::Kind::normal ? spec.x0.sd * spec.x0.sd : 0.0;
        for (int node : spec.snapshot_nodes) {
            const double t = spec.grid.node(node);
            double m = 0.0;
            preset_exact_mean("fbm", spec.preset_params, spec.x0, t, &m);
            double v = var0 + std::pow(t, 2.0 * spec.hurst.value());
            if (cx) v *= 2.0;
            tab.t.push_back(t);
            tab.m.push_back(m);
            tab.d.push_back(std::sqrt(v));
        }
        return tab;
    }
    tab.method = "mc";
    tab.n_mc = 10000;
    for (int node : spec.snapshot_nodes) {
        const double t = spec.grid.node(node);
        if (cx) {
            const auto est = moment_estimator_2d(spec.coeffs2d, spec.x0, spec.hurst, spec.grid, t,
                                                 tab.n_mc, spec.seed, workers);
            tab.t.push_back(est.t);
            tab.m.push_back(est.m_t[0]);
            tab.d.push_back(est.d_t);
        } else {
            const auto est = moment_estimator(spec.coeffs, spec.x0, spec.hurst, spec.grid, t,
                                              tab.n_mc, spec.seed, workers);
            tab.t.push_back(est.t);
            tab.m.push_back(est.m_t);
            tab.d.push_back(est.d_t);
        }
    }
    return tab;
}

double table_scale(const MomentTable& tab, double t) {
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        if (std::abs(tab.t[i] - t) <= 1e-9 * std::max(1.0, std::abs(tab.t[i]))) return tab.d[i];
    throw ConfigError("moment table has no entry at t = " + std::to_string(t));
}

bool law_needs_auto(const LawId& id) {
    return id.kind == LawId::Kind::semicircle ? !id.d.has_value() : !id.sigma.has_value();
}

std::uint64_t replica_hash(std::uint64_t cfg_hash, std::uint64_t seed, std::uint32_t replica) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), ":%llu:%u", static_cast<unsigned long long>(seed), replica);
    return fnv1a64(buf, std::strlen(buf), cfg_hash);
}

std::string spectra_name(int replica) {
    return replica == 0 ? "spectra.csv" : "spectra_" + std::to_string(replica) + ".csv";
}

struct Emitter {
    fs::path dir;
    bool quiet = true;
    RunArtifact art;

    void wrote(const std::string& name) {
        art.checksums[name] = file_checksum((dir / name).string());
        note(quiet, "wrote " + (dir / name).string());
    }
};

Emitter make_emitter(const std::string& out_dir, bool quiet) {
    Emitter em;
    em.dir = out_dir;
    em.quiet = quiet;
    em.art.out_dir = out_dir;
    std::error_code ec;
    fs::create_directories(em.dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
    return em;
}

json moments_json(const MomentTable& tab) {
    return {{"t", tab.t}, {"m", tab.m}, {"d", tab.d}, {"method", tab.method},
            {"n_mc", tab.n_mc}};
}

json centering_json(const CenteringTable& tab) {
    return {{"t", tab.t},       {"m1", tab.m1},     {"m2", tab.m2},
            {"method", tab.method}, {"n_mc", tab.n_mc}};
}

json manifest_base(const RunConfig& cfg) {
    json m;
    m["tool"] = "spectralflow";
    m["version"] = kToolVersion;
    m["config"] = config_to_json(cfg);
    m["config_hash"] = checksum_hex(config_hash(cfg));
    m["seed"] = cfg.seed;
    return m;
}

void write_manifest(Emitter& em, json manifest) {
    json files = json::object();
    for (const auto& [name, sum] : em.art.checksums) files[name] = checksum_hex(sum);
    manifest["files"] = files;
    write_text_file((em.dir / "manifest.json").string(), manifest.dump(2) + "\n");
    em.art.manifest = std::move(manifest);
    em.wrote("manifest.json");
}

void write_metric_rows(const fs::path& path,
                       const std::vector<std::pair<MetricRow, std::uint64_t>>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::fputs("t,metric,value,law,ensemble_hash\n", f);
    for (const auto& [row, hash] : rows) {
        std::fprintf(f, "%.17g,ks,%.17g,%s,%016llx\n", row.t, row.ks, row.law.c_str(),
                     static_cast<unsigned long long>(hash));
        std::fprintf(f, "%.17g,w1,%.17g,%s,%016llx\n", row.t, row.w1, row.law.c_str(),
                     static_cast<unsigned long long>(hash));
    }
    std::fclose(f);
}

// --- stieltjes / residual / holder / fixed-point emission ------------------

ComplexGrid grid_from(const ZGridParams& p, std::vector<double> times) {
    if (p.n_e < 2) throw ConfigError("z_grid.n_e must be >= 2 for transform output");
    ComplexGrid g;
    g.e_min = p.e_min;
    g.e_max = p.e_max;
    g.n_e = p.n_e;
    g.eta = p.eta;
    g.times = std::move(times);
    return g;
}

std::vector<double> frame_times(const ESDSeries& series) {
    std::vector<double> times;
    for (const auto& f : series.frames) times.push_back(f.t);
    return times;
}

void emit_stieltjes(Emitter& em, const RunConfig& cfg, const ESDSeries& series,
                    const MomentTable& moments, json* manifest) {
    const ComplexGrid grid = grid_from(cfg.zgrid, frame_times(series));
    try {
        validate_grid(grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("z_grid: ") + e.what());
    }
    const StieltjesField emp = empirical_field(series, grid);
    write_field_csv(emp, (em.dir / "stieltjes.csv").string());
    em.wrote("stieltjes.csv");

    json block;
    block["eta"] = grid.eta;
    block["law"] = cfg.laws.front();
    const LawId id = parse_law_id(cfg.laws.front());
    std::vector<double> scale(series.frames.size());
    bool resolvable = true;
    for (std::size_t i = 0; i < series.frames.size(); ++i) {
        const double d = law_needs_auto(id)
                             ? table_scale(moments, series.frames[i].t)
                             : (id.kind == LawId::Kind::semicircle ? *id.d : *id.sigma);
        if (!(d > 0.0)) resolvable = false;
        scale[i] = d;
    }
    if (resolvable) {
        const StieltjesField closed = id.kind == LawId::Kind::semicircle
                                          ? closed_sc_field(grid, scale)
                                          : closed_mp_field(grid, id.c, scale);
        write_field_csv(closed, (em.dir / "stieltjes_closed.csv").string());
        em.wrote("stieltjes_closed.csv");
        double gap = 0.0;
        for (std::size_t i = 0; i < emp.values.size(); ++i)
            gap = std::max(gap, std::abs(emp.values[i] - closed.values[i]));
        block["max_gap"] = gap;
    } else {
        block["max_gap"] = nullptr;  // law scale degenerate at some snapshot
    }
    (*manifest)["stieltjes"] = block;
}

void append_residual_rows(std::string& out, const ResidualField& r) {
    char buf[128];
    for (std::size_t ti = 0; ti < r.times.size(); ++ti)
        for (std::size_t j = 0; j < r.energies.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%s\n", r.times[ti], r.energies[j],
                          r.at(ti, j), r.equation_id.c_str());
            out += buf;
        }
}

// Closed-form transport residual suite on a dense (t, E) grid; probes the
// limit equations themselves, independent of the simulated paths.
void emit_residuals(Emitter& em, const RunConfig& cfg, json* manifest) {
    const double h = cfg.ensemble.hurst.value();
    const int nt = 65, ne = 385;
    std::vector<double> times(nt), d_series(nt);
    for (int i = 0; i < nt; ++i) {
        times[i] = 0.5 + i / 64.0;
        d_series[i] = std::pow(times[i], h);
    }
    ComplexGrid g;
    g.e_min = -3.0;
    g.e_max = 3.0;
    g.n_e = ne;
    g.eta = 0.5;
    g.times = times;

    const StieltjesField sc_field = closed_sc_field(g, d_series);
    const ResidualField r_sc = pde_residual_sc(sc_field, d_series);
    const ResidualField r_fbm = pde_residual_sc_fbm(sc_field, h);

    // Burgers form wants uniform u = t^{2H}; evaluate on the reindexed times.
    const double u0 = std::pow(0.5, 2.0 * h), u1 = std::pow(1.5, 2.0 * h);
    ComplexGrid gb = g;
    std::vector<double> db(nt);
    for (int i = 0; i < nt; ++i) {
        const double u = u0 + (u1 - u0) * i / (nt - 1);
        gb.times[i] = std::pow(u, 0.5 / h);
        db[i] = std::pow(gb.times[i], h);
    }
    const ResidualField r_bg = burgers_check(closed_sc_field(gb, db), h);

    std::string csv = "t,re_z,residual,equation_id\n";
    append_residual_rows(csv, r_sc);
    append_residual_rows(csv, r_fbm);
    append_residual_rows(csv, r_bg);

    json block;
    block["sc"] = r_sc.max_abs();
    block["sc_fbm"] = r_fbm.max_abs();
    block["burgers"] = r_bg.max_abs();

    for (const auto& law : cfg.laws) {
        const LawId id = parse_law_id(law);
        if (id.kind != LawId::Kind::marchenko_pastur) continue;
        ComplexGrid gm = g;
        gm.e_min = 0.0625;
        gm.e_max = 4.0;
        gm.n_e = 253;
        const ResidualField r_mp = pde_residual_mp(closed_mp_field(gm, id.c, d_series),
                                                   d_series, id.c);
        append_residual_rows(csv, r_mp);
        block["mp"] = r_mp.max_abs();
        break;
    }

    write_text_file((em.dir / "residuals.csv").string(), csv);
    em.wrote("residuals.csv");
    (*manifest)["residuals"] = block;
}

void emit_holder(Emitter& em, const RunConfig& cfg, json* manifest) {
    const EnsembleSpec base = spec_for(cfg, 0);
    const double beta = base.hurst.value() - 0.05;
    std::string csv = "kind,index,param,value\n";
    char buf[128];

    // Entry regularity: 8 probe paths of the scalar entry SDE.
    FgnOptions fo;
    fo.stream_kind = rng::StreamKind::probe;
    fo.stream_replica = base.replica;
    fo.stream_offset = 7000;
    const GaussianPathBatch drivers =
        generate_fbm(base.grid, base.hurst, 8, base.seed, fo, cfg.workers);
    double max_quotient = 0.0;
    for (int i = 0; i < 8; ++i) {
        rng::GaussianStream gs(base.seed,
                               rng::stream_id(rng::StreamKind::probe, base.replica,
                                              7100 + static_cast<std::uint64_t>(i)));
        const SamplePath path = integrate(base.coeffs, drivers, i, base.x0.draw(gs));
        const HolderEstimate est = holder_norm_estimate(path, beta);
        max_quotient = std::max(max_quotient, est.quotient);
        std::snprintf(buf, sizeof(buf), "entry_quotient,%d,%.17g,%.17g\n", i, beta, est.quotient);
        csv += buf;
    }

    // Flow modulus of the measure-valued process on a denser snapshot set.
    EnsembleSpec dense = base;
    dense.snapshot_nodes.clear();
    const int slots = std::min(16, base.grid.steps);
    for (int k = 0; k <= slots; ++k) {
        const int node = static_cast<int>(
            std::lround(static_cast<double>(k) * base.grid.steps / slots));
        if (dense.snapshot_nodes.empty() || node > dense.snapshot_nodes.back())
            dense.snapshot_nodes.push_back(node);
    }
    const ESDSeries series = esd_series(build_frames(dense));
    const TestFunction f = test_function("phi");
    json deltas = json::array(), moduli = json::array();
    for (int k = 0; k < 3; ++k) {
        const double delta = base.grid.t_end * 0.25 / static_cast<double>(1 << k);
        const double value = measure_flow_modulus(series, f, delta);
        std::snprintf(buf, sizeof(buf), "flow_modulus,%d,%.17g,%.17g\n", k, delta, value);
        csv += buf;
        deltas.push_back(delta);
        moduli.push_back(value);
    }

    write_text_file((em.dir / "holder.csv").string(), csv);
    em.wrote("holder.csv");
    (*manifest)["holder"] = {{"beta", beta},
                             {"max_quotient", max_quotient},
                             {"test_function", f.name},
                             {"deltas", deltas},
                             {"moduli", moduli}};
}

struct VariantOutcome {
    std::string name;
    SignConvention sign = SignConvention::selfconsistent_minus;
    bool converged = false;
    double max_gap = 0.0;
    int max_iterations = 0;
    std::string error;
    std::vector<FixedPointResult> results;
};

void emit_fixedpoint(Emitter& em, const RunConfig& cfg, const ESDSeries& series,
                     const MomentTable& moments, json* manifest) {
    if (cfg.ensemble.variant != EnsembleVariant::dependent)
        throw ConfigError("fixedpoint output needs the dependent variant");
    const SpectrumFrame& frame = series.frames.back();
    const double t_final = frame.t;
    const DependentKernel kernel =
        enumerate_gamma(cfg.ensemble.index_set, table_scale(moments, t_final));

    const ZGridParams& p = cfg.zgrid;
    if (p.n_e < 1) throw ConfigError("z_grid.n_e must be >= 1");
    std::vector<cplx> zs(static_cast<std::size_t>(p.n_e));
    for (int j = 0; j < p.n_e; ++j) {
        const double e = p.n_e == 1 ? p.e_min : p.e_min + (p.e_max - p.e_min) * j / (p.n_e - 1);
        zs[static_cast<std::size_t>(j)] = {e, p.eta};
    }
    // Empirical reference mapped to the fixed-point convention: S = -G.
    std::vector<cplx> s_emp(zs.size());
    for (std::size_t j = 0; j < zs.size(); ++j)
        s_emp[j] = -empirical_stieltjes(frame, zs[j]);

    const auto workers = static_cast<unsigned>(cfg.workers > 0 ? cfg.workers : 0);
    FixedPointConfig fp;
    fp.max_iter = 500;

    std::vector<VariantOutcome> outcomes(3);
    outcomes[0].name = "mirror";
    outcomes[0].sign = SignConvention::selfconsistent_minus;
    outcomes[1].name = "scalar_minus";
    outcomes[1].sign = SignConvention::selfconsistent_minus;
    outcomes[2].name = "scalar_plus";
    outcomes[2].sign = SignConvention::plus;
    for (auto& out : outcomes) {
        FixedPointConfig vf = fp;
        vf.sign = out.sign;
        try {
            out.results = fixed_point_grid(kernel, zs, vf, out.name == "mirror", workers);
            out.converged = true;
            for (std::size_t j = 0; j < zs.size(); ++j) {
                out.max_gap = std::max(out.max_gap, std::abs(out.results[j].s - s_emp[j]));
                out.max_iterations = std::max(out.max_iterations, out.results[j].iterations);
            }
        } catch (const FixedPointError& e) {
            out.error = e.what();
        }
    }

    const VariantOutcome* best = nullptr;
    for (const auto& out : outcomes)
        if (out.converged && (!best || out.max_gap < best->max_gap)) best = &out;
    if (!best)
        throw std::runtime_error("no fixed-point variant converged on the requested z-grid");

    std::string csv = "t,re_z,im_z,variant,re_S,im_S,iterations,converged\n";
    char buf[192];
    for (std::size_t j = 0; j < zs.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,empirical,%.17g,%.17g,0,1\n", t_final,
                      zs[j].real(), zs[j].imag(), s_emp[j].real(), s_emp[j].imag());
        csv += buf;
    }
    for (const auto& out : outcomes) {
        if (!out.converged) continue;
        for (std::size_t j = 0; j < zs.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%s,%.17g,%.17g,%d,%d\n", t_final,
                          zs[j].real(), zs[j].imag(), out.name.c_str(), out.results[j].s.real(),
                          out.results[j].s.imag(), out.results[j].iterations,
                          out.results[j].converged ? 1 : 0);
            csv += buf;
        }
    }
    write_text_file((em.dir / "fixedpoint.csv").string(), csv);
    em.wrote("fixedpoint.csv");

    json variants = json::object();
    for (const auto& out : outcomes) {
        json v;
        v["sign"] = sign_name(out.sign);
        v["converged"] = out.converged;
        if (out.converged) {
            v["max_gap"] = out.max_gap;
            v["max_iterations"] = out.max_iterations;
        } else {
            v["error"] = out.error;
        }
        variants[out.name] = v;
    }
    (*manifest)["fixed_point"] = {{"t", t_final},
                                  {"d_t", kernel.d_t},
                                  {"gamma_abs_sum", kernel.gamma_abs_sum()},
                                  {"raw_transpose_symmetric", kernel.raw_transpose_symmetric},
                                  {"max_raw_asymmetry", kernel.max_raw_asymmetry},
                                  {"selected", best->name},
                                  {"sign", sign_name(best->sign)},
                                  {"max_gap", best->max_gap},
                                  {"max_iterations", best->max_iterations},
                                  {"variants", variants}};
}

// Shared front half of the simulation-style subcommands: frames, spectra
// CSVs, moment table.
struct SimOutput {
    std::vector<ESDSeries> series;
    MomentTable moments;
    CenteringTable centering;
    json manifest;
};

SimOutput simulate_core(Emitter& em, const RunConfig& cfg, int replicas) {
    SimOutput out;
    const std::uint64_t chash = config_hash(cfg);
    em.art.config_hash = chash;
    out.moments = resolve_moments(spec_for(cfg, 0), cfg.workers);

    const bool wishart = wishart_variant(cfg.ensemble.variant);
    json hashes = json::array();
    for (int r = 0; r < replicas; ++r) {
        EnsembleSpec spec = spec_for(cfg, r);
        try {
            validate_spec(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const auto frames = build_frames(spec, r == 0 && wishart ? &out.centering : nullptr);
        ESDSeries series = esd_series(frames, {}, replica_hash(chash, cfg.seed,
                                                               static_cast<std::uint32_t>(r)));
        write_spectrum_csv(series, (em.dir / spectra_name(r)).string());
        em.wrote(spectra_name(r));
        hashes.push_back(checksum_hex(series.ensemble_hash));
        out.series.push_back(std::move(series));
    }

    out.manifest = manifest_base(cfg);
    out.manifest["replicas"] = replicas;
    out.manifest["replica_hashes"] = hashes;
    out.manifest["moments"] = moments_json(out.moments);
    if (wishart) out.manifest["centering"] = centering_json(out.centering);
    return out;
}

}  // namespace

RunArtifact cmd_simulate(const RunConfig& cfg) {
    Emitter em = make_emitter(cfg.out_dir, cfg.quiet);
    SimOutput sim = simulate_core(em, cfg, cfg.replicas);

    std::vector<std::pair<MetricRow, std::uint64_t>> rows;
    for (const auto& series : sim.series) {
        for (const auto& law_id : cfg.laws) {
            const LawId id = parse_law_id(law_id);
            for (const auto& frame : series.frames) {
                const double scale =
                    law_needs_auto(id) ? table_scale(sim.moments, frame.t) : 1.0;
                if (law_needs_auto(id) && !(scale > 0.0)) continue;  // degenerate at t = 0
                MetricRow row = metric_row(frame, resolve_law(id, scale));
                row.law = law_id;
                rows.push_back({row, series.ensemble_hash});
            }
        }
    }
    write_metric_rows(em.dir / "metrics.csv", rows);
    em.wrote("metrics.csv");

    if (cfg.toggles.stieltjes) emit_stieltjes(em, cfg, sim.series.front(), sim.moments,
                                              &sim.manifest);
    if (cfg.toggles.pde_checks) emit_residuals(em, cfg, &sim.manifest);
    if (cfg.toggles.holder_diag) emit_holder(em, cfg, &sim.manifest);
    if (cfg.toggles.fixedpoint)
        emit_fixedpoint(em, cfg, sim.series.front(), sim.moments, &sim.manifest);

    write_manifest(em, std::move(sim.manifest));
    return em.art;
}

RunArtifact cmd_fixedpoint(const RunConfig& cfg) {
    if (cfg.ensemble.variant != EnsembleVariant::dependent)
        throw ConfigError("fixedpoint needs ensemble.variant = dependent");
    Emitter em = make_emitter(cfg.out_dir, cfg.quiet);
    SimOutput sim = simulate_core(em, cfg, 1);
    emit_fixedpoint(em, cfg, sim.series.front(), sim.moments, &sim.manifest);
    write_manifest(em, std::move(sim.manifest));
    return em.art;
}

RunArtifact cmd_stieltjes(const RunConfig& cfg) {
    Emitter em = make_emitter(cfg.out_dir, cfg.quiet);
    SimOutput sim = simulate_core(em, cfg, 1);
    emit_stieltjes(em, cfg, sim.series.front(), sim.moments, &sim.manifest);
    if (cfg.toggles.pde_checks) emit_residuals(em, cfg, &sim.manifest);
    write_manifest(em, std::move(sim.manifest));
    return em.art;
}

RunArtifact cmd_holder(const RunConfig& cfg) {
    Emitter em = make_emitter(cfg.out_dir, cfg.quiet);
    em.art.config_hash = config_hash(cfg);
    json manifest = manifest_base(cfg);
    manifest["moments"] = moments_json(resolve_moments(spec_for(cfg, 0), cfg.workers));
    emit_holder(em, cfg, &manifest);
    write_manifest(em, std::move(manifest));
    return em.art;
}

namespace {

json load_manifest(const fs::path& dir) {
    const fs::path path = dir / "manifest.json";
    if (!fs::exists(path))
        throw ConfigError(dir.string() + " is not a run directory (no manifest.json)");
    try {
        return json::parse(read_text_file(path.string()));
    } catch (const std::exception& e) {
        throw ConfigError("corrupt manifest in " + dir.string() + ": " + e.what());
    }
}

MomentTable moments_from_manifest(const json& manifest) {
    if (!manifest.contains("moments")) throw ConfigError("manifest lacks a moment table");
    const json& m = manifest.at("moments");
    MomentTable tab;
    try {
        tab.t = m.at("t").get<std::vector<double>>();
        tab.d = m.at("d").get<std::vector<double>>();
        tab.m = m.at("m").get<std::vector<double>>();
        tab.method = m.at("method").get<std::string>();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad moment table in manifest: ") + e.what());
    }
    return tab;
}

ESDSeries load_spectra(const fs::path& dir, const json& manifest) {
    ESDSeries series;
    try {
        series = read_spectrum_csv((dir / "spectra.csv").string());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (manifest.contains("replica_hashes") && !manifest.at("replica_hashes").empty())
        series.ensemble_hash = std::stoull(
            manifest.at("replica_hashes").at(0).get<std::string>(), nullptr, 16);
    return series;
}

double law_density_at(const SpectralLaw& law, double x) {
    if (std::holds_alternative<SemicircleLaw>(law))
        return sc_density(std::get<SemicircleLaw>(law), x);
    return mp_density(std::get<MarchenkoPasturLaw>(law), x);
}

}  // namespace

RunArtifact cmd_compare(const std::string& run_dir, const std::string& law_id, bool quiet) {
    const fs::path dir = run_dir;
    const json manifest = load_manifest(dir);
    LawId id;
    try {
        id = parse_law_id(law_id);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad law id '") + law_id + "': " + e.what());
    }
    const ESDSeries series = load_spectra(dir, manifest);

    MetricReport report;
    report.ensemble_hash = series.ensemble_hash;
    MomentTable moments;
    if (law_needs_auto(id)) moments = moments_from_manifest(manifest);
    for (const auto& frame : series.frames) {
        const double scale = law_needs_auto(id) ? table_scale(moments, frame.t) : 1.0;
        if (law_needs_auto(id) && !(scale > 0.0)) continue;
        MetricRow row = metric_row(frame, resolve_law(id, scale));
        row.law = law_id;
        report.rows.push_back(row);
    }
    if (report.rows.empty()) throw ConfigError("no frames with a resolvable law scale");

    write_metrics_csv(report, (dir / "compare.csv").string());
    RunArtifact art;
    art.out_dir = run_dir;
    if (manifest.contains("config_hash"))
        art.config_hash = std::stoull(manifest.at("config_hash").get<std::string>(), nullptr, 16);
    art.checksums["compare.csv"] = file_checksum((dir / "compare.csv").string());
    art.manifest = manifest;
    note(quiet, "wrote " + (dir / "compare.csv").string());
    return art;
}

RunArtifact cmd_report(const std::string& run_dir, bool quiet) {
    const fs::path dir = run_dir;
    const json manifest = load_manifest(dir);
    const ESDSeries series = load_spectra(dir, manifest);
    const SpectrumFrame& last = series.frames.back();

    Emitter em = make_emitter((dir / "report").string(), quiet);
    if (manifest.contains("config_hash"))
        em.art.config_hash =
            std::stoull(manifest.at("config_hash").get<std::string>(), nullptr, 16);

    // Final-time histogram with the first configured law's density overlaid.
    const Histogram hist = freedman_diaconis(last.eigenvalues);
    XYSeries overlay;
    std::string law_id = "sc:auto";
    if (manifest.contains("config") && manifest.at("config").contains("laws"))
        law_id = manifest.at("config").at("laws").at(0).get<std::string>();
    try {
        const LawId id = parse_law_id(law_id);
        double scale = 1.0;
        if (law_needs_auto(id)) scale = table_scale(moments_from_manifest(manifest), last.t);
        const SpectralLaw law = resolve_law(id, scale);
        overlay.label = law_tag(law);
        const double lo = hist.edges.front(), hi = hist.edges.back();
        for (int i = 0; i <= 256; ++i) {
            const double x = lo + (hi - lo) * i / 256.0;
            overlay.x.push_back(x);
            overlay.y.push_back(law_density_at(law, x));
        }
    } catch (const std::exception&) {
        overlay = XYSeries{};  // no resolvable overlay; plot the histogram alone
    }
    char title[128];
    std::snprintf(title, sizeof(title), "empirical spectrum at t = %.6g (n = %zu)", last.t,
                  last.eigenvalues.size());
    write_text_file((em.dir / "esd_hist.svg").string(), svg_histogram(hist, overlay, title));
    em.wrote("esd_hist.svg");

    // Empirical CDF with the law CDF overlay; always emittable.
    {
        std::vector<XYSeries> cdf_series(1);
        cdf_series[0].label = "empirical cdf";
        const double n = static_cast<double>(last.eigenvalues.size());
        for (std::size_t i = 0; i < last.eigenvalues.size(); ++i) {
            cdf_series[0].x.push_back(last.eigenvalues[i]);
            cdf_series[0].y.push_back(static_cast<double>(i + 1) / n);
        }
        if (!overlay.x.empty()) {
            XYSeries law_cdf_series;
            law_cdf_series.label = overlay.label + " cdf";
            const LawId id = parse_law_id(law_id);
            double scale = 1.0;
            if (law_needs_auto(id)) scale = table_scale(moments_from_manifest(manifest), last.t);
            const SpectralLaw law = resolve_law(id, scale);
            for (double x : overlay.x) {
                law_cdf_series.x.push_back(x);
                law_cdf_series.y.push_back(law_cdf(law, x));
            }
            cdf_series.push_back(std::move(law_cdf_series));
        }
        write_text_file((em.dir / "esd_cdf.svg").string(),
                        svg_lines(cdf_series, "spectral distribution", "x", "F(x)"));
        em.wrote("esd_cdf.svg");
    }

    // Metric trajectories when the run produced them.
    if (fs::exists(dir / "metrics.csv")) {
        const CsvTable table = read_csv((dir / "metrics.csv").string());
        const int ct = table.column("t"), cm = table.column("metric"), cv = table.column("value");
        const int cl = table.column("law");
        if (ct >= 0 && cm >= 0 && cv >= 0 && cl >= 0) {
            std::map<std::string, std::map<double, std::pair<double, int>>> groups;
            for (const auto& row : table.rows) {
                const std::string key = row[static_cast<std::size_t>(cm)] + " " +
                                        row[static_cast<std::size_t>(cl)];
                const double t = std::stod(row[static_cast<std::size_t>(ct)]);
                const double v = std::stod(row[static_cast<std::size_t>(cv)]);
                auto& cell = groups[key][t];
                cell.first += v;
                cell.second += 1;
            }
            std::vector<XYSeries> lines;
            for (const auto& [key, by_t] : groups) {
                XYSeries s;
                s.label = key;
                for (const auto& [t, acc] : by_t) {
                    s.x.push_back(t);
                    s.y.push_back(acc.first / acc.second);
                }
                lines.push_back(std::move(s));
            }
            write_text_file((em.dir / "metrics.svg").string(),
                            svg_lines(lines, "distance to reference law", "t", "distance"));
            em.wrote("metrics.svg");
        }
    }

    // Residual heat map for the first transport equation present.
    if (fs::exists(dir / "residuals.csv")) {
        const CsvTable table = read_csv((dir / "residuals.csv").string());
        const int ct = table.column("t"), ce = table.column("re_z"), cv = table.column("residual");
        const int cq = table.column("equation_id");
        if (ct >= 0 && ce >= 0 && cv >= 0 && cq >= 0 && !table.rows.empty()) {
            const std::string eq = table.rows.front()[static_cast<std::size_t>(cq)];
            std::map<double, std::map<double, double>> cells;
            for (const auto& row : table.rows) {
                if (row[static_cast<std::size_t>(cq)] != eq) continue;
                cells[std::stod(row[static_cast<std::size_t>(ct)])]
                     [std::stod(row[static_cast<std::size_t>(ce)])] =
                         std::stod(row[static_cast<std::size_t>(cv)]);
            }
            std::vector<double> ts, es, values;
            for (const auto& kv : cells) ts.push_back(kv.first);
            for (const auto& kv : cells.begin()->second) es.push_back(kv.first);
            bool rectangular = true;
            for (const auto& kv : cells) rectangular &= kv.second.size() == es.size();
            if (rectangular && !es.empty()) {
                for (const auto& kv : cells)
                    for (const auto& ev : kv.second) values.push_back(ev.second);
                write_text_file((em.dir / "residual_heatmap.svg").string(),
                                svg_heatmap(es, ts, values, "|residual| (" + eq + ")"));
                em.wrote("residual_heatmap.svg");
            }
        }
    }

    // Deterministic run summary assembled from the manifest.
    std::string md = "# run summary\n\n";
    if (manifest.contains("config_hash"))
        md += "- config hash: `" + manifest.at("config_hash").get<std::string>() + "`\n";
    if (manifest.contains("seed")) md += "- seed: " + manifest.at("seed").dump() + "\n";
    if (manifest.contains("version"))
        md += "- tool version: " + manifest.at("version").get<std::string>() + "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "- final frame: t = %.6g, %zu eigenvalues\n", last.t,
                  last.eigenvalues.size());
    md += line;
    if (manifest.contains("moments")) {
        md += "- law scale method: " + manifest.at("moments").at("method").get<std::string>() +
              "\n";
    }
    if (manifest.contains("stieltjes"))
        md += "- stieltjes gap vs " +
              manifest.at("stieltjes").at("law").get<std::string>() + ": " +
              manifest.at("stieltjes").at("max_gap").dump() + "\n";
    if (manifest.contains("residuals"))
        md += "- max transport residuals: " + manifest.at("residuals").dump() + "\n";
    if (manifest.contains("fixed_point")) {
        const json& fpb = manifest.at("fixed_point");
        md += "- fixed point: selected " + fpb.at("selected").get<std::string>() + " (sign " +
              fpb.at("sign").get<std::string>() + "), max gap " + fpb.at("max_gap").dump() +
              "\n";
    }
    if (manifest.contains("files")) {
        md += "\n## files\n\n| file | fnv1a64 |\n| --- | --- |\n";
        for (const auto& [name, sum] : manifest.at("files").items())
            md += "| " + name + " | `" + sum.get<std::string>() + "` |\n";
    }
    md += "\n## report artifacts\n\n";
    for (const auto& [name, sum] : em.art.checksums) {
        (void)sum;
        md += "- " + name + "\n";
    }
    md += "- summary.md\n";
    write_text_file((em.dir / "summary.md").string(), md);
    em.wrote("summary.md");

    em.art.manifest = manifest;
    return em.art;
}

namespace {

struct CliCommon {
    std::string config;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    int workers = 0;
    std::string out;
    bool quiet = false;
};

void add_common(CLI::App* sub, CliCommon& c, bool needs_config) {
    auto* config_opt = sub->add_option("--config", c.config, "run configuration (json)");
    if (needs_config) config_opt->required();
    c.seed_opt = sub->add_option("--seed", c.seed, "override the config seed");
    sub->add_option("--workers", c.workers,
                    "worker threads (0: SPECTRALFLOW_WORKERS or hardware)");
    sub->add_option("--out", c.out, "output directory (overrides config out_dir)");
    sub->add_flag("--quiet", c.quiet, "suppress progress lines");
}

RunConfig config_from_cli(const CliCommon& c) {
    RunConfig cfg = load_config(c.config);
    if (c.seed_opt && c.seed_opt->count() > 0) {
        cfg.seed = c.seed;
        cfg.ensemble.seed = c.seed;
    }
    if (!c.out.empty()) cfg.out_dir = c.out;
    cfg.workers = resolve_workers(c.workers);
    cfg.ensemble.workers = cfg.workers;
    cfg.quiet = c.quiet;
    return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"spectral flows of matrix-valued fractional sdes"};
    app.require_subcommand(1);

    CliCommon c_sim, c_fp, c_st, c_ho, c_cmp, c_rep;
    std::string law_id;

    CLI::App* sim = app.add_subcommand("simulate", "sample ensembles and track spectra");
    add_common(sim, c_sim, true);
    CLI::App* cmp = app.add_subcommand("compare", "distances of a stored run to a law");
    add_common(cmp, c_cmp, false);
    cmp->add_option("law", law_id, "reference law id (sc:<d>|mp:<c>:<sigma>, scales may be auto)")
        ->required();
    CLI::App* fpc = app.add_subcommand("fixedpoint", "dependent-kernel fixed point vs ensemble");
    add_common(fpc, c_fp, true);
    CLI::App* stj = app.add_subcommand("stieltjes", "empirical and closed-form transforms");
    add_common(stj, c_st, true);
    CLI::App* hol = app.add_subcommand("holder", "pathwise and flow regularity diagnostics");
    add_common(hol, c_ho, true);
    CLI::App* rep = app.add_subcommand("report", "render svg/markdown for a stored run");
    add_common(rep, c_rep, false);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            cmd_simulate(config_from_cli(c_sim));
        } else if (cmp->parsed()) {
            if (c_cmp.out.empty()) throw ConfigError("compare needs --out <run directory>");
            cmd_compare(c_cmp.out, law_id, c_cmp.quiet);
        } else if (fpc->parsed()) {
            cmd_fixedpoint(config_from_cli(c_fp));
        } else if (stj->parsed()) {
            cmd_stieltjes(config_from_cli(c_st));
        } else if (hol->parsed()) {
            cmd_holder(config_from_cli(c_ho));
        } else if (rep->parsed()) {
            if (c_rep.out.empty()) throw ConfigError("report needs --out <run directory>");
            cmd_report(c_rep.out, c_rep.quiet);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace spectralflow
