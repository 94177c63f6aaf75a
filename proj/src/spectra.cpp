#include "spectralflow/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace spectralflow {

namespace {

Eigen::MatrixXd real_matrix(const MatrixProcessFrame& f) {
    Eigen::MatrixXd m(f.dim, f.dim);
    for (int i = 0; i < f.dim; ++i)
        for (int j = 0; j < f.dim; ++j) m(i, j) = f.real_at(i, j);
    return m;
}

Eigen::MatrixXcd complex_matrix(const MatrixProcessFrame& f) {
    Eigen::MatrixXcd m(f.dim, f.dim);
    for (int i = 0; i < f.dim; ++i)
        for (int j = 0; j < f.dim; ++j)
            m(i, j) = std::complex<double>(f.real_at(i, j), f.imag_at(i, j));
    return m;
}

template <typename Matrix>
void check_selfadjoint(const Matrix& m, double tol) {
    const double scale = std::max(m.norm(), 1e-300);
    const double gap = (m - m.adjoint()).norm();
    if (gap > tol * scale)
        throw std::invalid_argument("frame is not symmetric/Hermitian within tolerance");
}

template <typename Matrix>
std::vector<double> solve_selfadjoint(const Matrix& m, const EigOptions& opts) {
    check_selfadjoint(m, opts.tol_sym);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, opts.verify ? Eigen::ComputeEigenvectors
                                                            : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
    if (opts.verify) {
        const double scale = std::max(m.norm(), 1e-300);
        const auto& vecs = es.eigenvectors();
        const auto resid = m * vecs - vecs * es.eigenvalues().asDiagonal();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < resid.cols(); ++i)
            worst = std::max(worst, resid.col(i).norm());
        if (worst > opts.tol_eig * scale)
            throw std::runtime_error("eigensolver residual exceeds tolerance");
    }
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(out.begin(), out.end());
    return out;
}

// Empirical CDF of an ascending sample, right-continuous.
double ecdf(const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
           static_cast<double>(sorted.size());
}

double ecdf_left(const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
           static_cast<double>(sorted.size());
}

}  // namespace

SpectrumFrame eigenvalues_sym(const MatrixProcessFrame& frame, const EigOptions& opts) {
    if (frame.dim < 1) throw std::invalid_argument("empty frame");
    SpectrumFrame out;
    out.t = frame.t;
    out.eigenvalues = frame.complex_entries ? solve_selfadjoint(complex_matrix(frame), opts)
                                            : solve_selfadjoint(real_matrix(frame), opts);
    return out;
}

ESDSeries esd_series(const std::vector<MatrixProcessFrame>& frames, const EigOptions& opts,
                     std::uint64_t ensemble_hash) {
    ESDSeries series;
    series.ensemble_hash = ensemble_hash;
    series.frames.reserve(frames.size());
    double prev = -1e300;
    for (const auto& f : frames) {
        if (f.t <= prev) throw std::invalid_argument("frame times must be strictly increasing");
        prev = f.t;
        series.frames.push_back(eigenvalues_sym(f, opts));
    }
    return series;
}

namespace {

// left limit of the law CDF; differs from law_cdf only at the MP atom
double law_cdf_left(const SpectralLaw& law, double x) {
    const double atom = law_atom_mass(law);
    if (atom > 0.0 && x == 0.0) return law_cdf(law, x) - atom;
    return law_cdf(law, x);
}

}  // namespace

double ks_distance(const SpectrumFrame& frame, const SpectralLaw& law) {
    const auto& ev = frame.eigenvalues;
    if (ev.empty()) throw std::invalid_argument("empty spectrum");
    const double n = static_cast<double>(ev.size());
    double ks = 0.0;
    // walk runs of tied values so the empirical CDF is evaluated at real jumps only
    for (std::size_t i = 0; i < ev.size();) {
        std::size_t j = i;
        while (j < ev.size() && ev[j] == ev[i]) ++j;
        ks = std::max(ks, std::abs(j / n - law_cdf(law, ev[i])));
        ks = std::max(ks, std::abs(i / n - law_cdf_left(law, ev[i])));
        i = j;
    }
    if (law_atom_mass(law) > 0.0) {
        // the law's CDF jumps at 0: evaluate both sides there too
        ks = std::max(ks, std::abs(ecdf(ev, 0.0) - law_cdf(law, 0.0)));
        ks = std::max(ks, std::abs(ecdf_left(ev, 0.0) - 0.0));
    }
    return ks;
}

double ks_distance_two_sample(const SpectrumFrame& a, const SpectrumFrame& b) {
    const auto& x = a.eigenvalues;
    const auto& y = b.eigenvalues;
    if (x.empty() || y.empty()) throw std::invalid_argument("empty spectrum");
    double ks = 0.0;
    for (double v : x) {
        ks = std::max(ks, std::abs(ecdf(x, v) - ecdf(y, v)));
        ks = std::max(ks, std::abs(ecdf_left(x, v) - ecdf_left(y, v)));
    }
    for (double v : y) {
        ks = std::max(ks, std::abs(ecdf(x, v) - ecdf(y, v)));
        ks = std::max(ks, std::abs(ecdf_left(x, v) - ecdf_left(y, v)));
    }
    return ks;
}

double wasserstein1(const SpectrumFrame& frame, const SpectralLaw& law) {
    const auto& ev = frame.eigenvalues;
    if (ev.empty()) throw std::invalid_argument("empty spectrum");
    const int k = 10000;
    const auto n = static_cast<std::size_t>(ev.size());
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        const double q = (i + 0.5) / k;
        const double emp = ev[std::min(n - 1, static_cast<std::size_t>(q * n))];
        acc += std::abs(emp - law_quantile(law, q));
    }
    return acc / k;
}

MetricRow metric_row(const SpectrumFrame& frame, const SpectralLaw& law) {
    MetricRow row;
    row.t = frame.t;
    row.ks = ks_distance(frame, law);
    row.w1 = wasserstein1(frame, law);
    row.law = law_tag(law);
    return row;
}

TestFunction test_function(const std::string& id) {
    TestFunction tf;
    tf.name = id;
    if (id == "arctan") {
        tf.f = [](double x) { return std::atan(x); };
        tf.fprime_sup = 1.0;
    } else if (id == "ratio") {
        tf.f = [](double x) { return x / std::sqrt(1.0 + x * x); };
        tf.fprime_sup = 1.0;
    } else if (id == "phi") {
        tf.f = [](double x) { return std::sqrt(1.0 + x * x); };
        tf.fprime_sup = 1.0;
    } else if (id == "sin") {
        tf.f = [](double x) { return std::sin(x); };
        tf.fprime_sup = 1.0;
    } else {
        throw std::invalid_argument("unknown test function: " + id);
    }
    return tf;
}

double esd_mean(const SpectrumFrame& frame, const TestFunction& f) {
    double acc = 0.0;
    for (double v : frame.eigenvalues) acc += f.f(v);
    return acc / static_cast<double>(frame.eigenvalues.size());
}

double measure_flow_modulus(const ESDSeries& series, const TestFunction& f, double delta) {
    const auto& frames = series.frames;
    std::vector<double> means(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) means[i] = esd_mean(frames[i], f);
    double worst = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (std::size_t j = i + 1; j < frames.size(); ++j) {
            if (frames[j].t - frames[i].t > delta) break;
            worst = std::max(worst, std::abs(means[j] - means[i]));
        }
    return worst;
}

double modulus_moment_probe(const EnsembleSpec& spec, const TestFunction& f, double s, double t,
                            int n_mc) {
    if (n_mc < 1) throw std::domain_error("n_mc must be >= 1");
    auto to_node = [&](double time) {
        const double nf = time / spec.grid.dt();
        const int node = static_cast<int>(std::lround(nf));
        if (node < 0 || node > spec.grid.steps ||
            std::abs(nf - node) * spec.grid.dt() > 1e-9 * spec.grid.t_end)
            throw std::domain_error("probe time must be a grid node");
        return node;
    };
    const int ns = to_node(s), nt = to_node(t);
    if (ns == nt) return 0.0;

    EnsembleSpec rspec = spec;
    rspec.snapshot_nodes = {std::min(ns, nt), std::max(ns, nt)};
    EigOptions opts;
    opts.verify = false;
    double acc = 0.0;
    for (int r = 0; r < n_mc; ++r) {
        rspec.replica = spec.replica + static_cast<std::uint32_t>(r);
        const auto frames = build_frames(rspec);
        const double gap =
            esd_mean(eigenvalues_sym(frames[1], opts), f) -
            esd_mean(eigenvalues_sym(frames[0], opts), f);
        acc += gap * gap;
    }
    return acc / n_mc;
}

HoffmanWielandt hoffman_wielandt_check(const MatrixProcessFrame& a, const MatrixProcessFrame& b,
                                       double tol) {
    if (a.dim != b.dim) throw std::invalid_argument("dimension mismatch");
    EigOptions opts;
    opts.verify = false;
    const auto ea = eigenvalues_sym(a, opts).eigenvalues;
    const auto eb = eigenvalues_sym(b, opts).eigenvalues;
    HoffmanWielandt hw;
    for (std::size_t i = 0; i < ea.size(); ++i) hw.lhs += (ea[i] - eb[i]) * (ea[i] - eb[i]);
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            const double dre = a.real_at(i, j) - b.real_at(i, j);
            const double dim_ = a.imag_at(i, j) - b.imag_at(i, j);
            hw.rhs += dre * dre + dim_ * dim_;
        }
    hw.ok = hw.lhs <= hw.rhs + tol * (1.0 + hw.rhs);
    return hw;
}

void write_spectrum_csv(const ESDSeries& series, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    std::fputs("t,rank,eigenvalue\n", f);
    for (const auto& frame : series.frames)
        for (std::size_t r = 0; r < frame.eigenvalues.size(); ++r)
            std::fprintf(f, "%.17g,%zu,%.17g\n", frame.t, r + 1, frame.eigenvalues[r]);
    std::fclose(f);
}

void write_metrics_csv(const MetricReport& report, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    std::fputs("t,metric,value,law,ensemble_hash\n", f);
    for (const auto& row : report.rows) {
        std::fprintf(f, "%.17g,ks,%.17g,%s,%016llx\n", row.t, row.ks, row.law.c_str(),
                     static_cast<unsigned long long>(report.ensemble_hash));
        std::fprintf(f, "%.17g,w1,%.17g,%s,%016llx\n", row.t, row.w1, row.law.c_str(),
                     static_cast<unsigned long long>(report.ensemble_hash));
    }
    std::fclose(f);
}

}  // namespace spectralflow
