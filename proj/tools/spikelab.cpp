#include "spikelab/bubble.hpp"
#include "spikelab/config.hpp"
#include "spikelab/constants.hpp"
#include "spikelab/critical_points.hpp"
#include "spikelab/domain.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/green_robin.hpp"
#include "spikelab/parallel.hpp"
#include "spikelab/projection.hpp"
#include "spikelab/quadrature.hpp"
#include "spikelab/radial_solver.hpp"
#include "spikelab/reduced_energy.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <unistd.h>

#ifndef SPIKELAB_VERSION
#define SPIKELAB_VERSION "0.0.0"
#endif

namespace {

using namespace spikelab;
using json = nlohmann::ordered_json;

constexpr int kOk = 0, kUsage = 1, kVerification = 2;

struct Common {
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

json jpoint(const Point& p) { return json::array({p(0), p(1), p(2), p(3)}); }
json jbox(const Box& b) { return {{"lo", jpoint(b.lo)}, {"hi", jpoint(b.hi)}}; }

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// temp file + rename, so a failed run never leaves a partial artifact
void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        os << text;
        os.flush();
        if (!os) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at '" + path + "'");
    }
}

struct LoadedDomain {
    std::string file;
    KeyValues kv;
    DomainDescriptor domain;
};

LoadedDomain load_domain(const std::string& path) {
    if (path.empty()) throw ConfigError("--domain is required");
    if (!std::filesystem::exists(path)) throw ConfigError("domain file '" + path + "' does not exist");
    KeyValues kv = KeyValues::load(path);
    DomainDescriptor d = DomainDescriptor::from_config(kv);
    return {path, kv, d};
}

json domain_json(const LoadedDomain& ld) {
    json j;
    j["file"] = ld.file;
    j["kind"] = ld.domain.kind_name();
    json entries = json::object();
    for (const auto& [k, v] : ld.kv.entries()) entries[k] = v;
    j["entries"] = entries;
    if (!ld.domain.closed_form()) {
        const auto& c = ld.domain.collocation();
        j["collocation"] = {{"n_boundary", c.n_boundary},        {"n_check", c.n_check},
                            {"n_charges", c.n_charges},          {"charge_offset", c.charge_offset},
                            {"residual_threshold", c.residual_threshold}, {"seed", c.seed}};
    }
    j["inradius"] = ld.domain.inradius();
    return j;
}

json report_header(const std::string& sub, const Common& c, json params, const LoadedDomain* ld) {
    json r;
    r["tool"] = "spikelab";
    r["version"] = SPIKELAB_VERSION;
    json cfg;
    cfg["subcommand"] = sub;
    if (ld) cfg["domain"] = domain_json(*ld);
    cfg["params"] = std::move(params);
    cfg["seed"] = c.seed;
    cfg["threads"] = thread_count();
    cfg["format"] = c.format;
    cfg["out"] = c.out;
    r["config"] = std::move(cfg);
    return r;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// "# key: value" lines so CSV artifacts carry the resolved config too
std::string csv_preamble(const json& header) {
    std::ostringstream os;
    os << "# " << header["tool"].get<std::string>() << " " << header["version"].get<std::string>() << "\n";
    os << "# config: " << header["config"].dump() << "\n";
    return os.str();
}

Box box_from(const std::vector<double>& v, std::size_t offset) {
    Box b;
    for (int d = 0; d < 4; ++d) {
        b.lo(d) = v[offset + d];
        b.hi(d) = v[offset + 4 + d];
    }
    for (int d = 0; d < 4; ++d)
        if (!(b.lo(d) < b.hi(d))) throw ConfigError("box lower corner must be below the upper corner in every coordinate");
    return b;
}

QuadratureSpec quad_spec(const Common& c, int radial_order, int inner_degree, std::size_t outer_samples) {
    QuadratureSpec s;
    s.seed = c.seed;
    s.radial_order = radial_order;
    s.inner_degree = inner_degree;
    s.outer_samples = outer_samples;
    return s;
}

json quad_spec_json(const QuadratureSpec& s) {
    return {{"radial_order", s.radial_order}, {"inner_degree", s.inner_degree},
            {"outer_samples", s.outer_samples}, {"seed", s.seed}, {"error_target", s.error_target}};
}

json critical_json(const CriticalPoint& c) {
    return {{"x", jpoint(c.x)},
            {"tau", c.tau},
            {"grad_residual", c.grad_residual},
            {"newton_step", c.newton_step},
            {"hessian_eigenvalues", json::array({c.eigenvalues(0), c.eigenvalues(1), c.eigenvalues(2), c.eigenvalues(3)})},
            {"classification", c.classification},
            {"index_sign", c.index_sign}};
}

json certificate_json(const DegreeCertificate& c) {
    json zs = json::array();
    for (const auto& z : c.zeros) zs.push_back(critical_json(z));
    return {{"box", jbox(c.box)},
            {"degree", c.degree},
            {"boundary_margin", c.boundary_margin},
            {"required_margin", c.required_margin},
            {"grid_level", c.grid_level},
            {"zeros_per_level", c.zeros_per_level},
            {"zeros", zs}};
}

json fit_json(const AsymptoticFitReport& r) {
    json coeffs = json::object();
    for (const auto& [k, v] : r.coefficients) coeffs[k] = v;
    return {{"lemma", r.lemma},         {"model", r.model},         {"sample_columns", r.sample_columns},
            {"samples", r.samples},     {"coefficients", coeffs},   {"residual", r.residual},
            {"predicted", r.predicted}, {"tolerance", r.tolerance}, {"pass", r.pass},
            {"note", r.note}};
}

json breakdown_json(const EnergyBreakdown& e) {
    auto mat = [](const Eigen::MatrixXd& m) {
        json a = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            a.push_back(row);
        }
        return a;
    };
    return {{"method", e.method},
            {"A", e.A},
            {"B", e.B},
            {"C", e.C},
            {"A_err", e.A_err},
            {"B_err", e.B_err},
            {"C_err", e.C_err},
            {"D", mat(e.D)},
            {"D_err", mat(e.D_err)},
            {"total", e.total()},
            {"total_error", e.total_error()},
            {"leading_level", e.leading_level},
            {"psi_value", e.psi_value},
            {"remainder_budget", e.remainder_budget},
            {"coupling_K", e.coupling_K}};
}

json reduced_json(const CriticalPointReport& r) {
    json xs = json::array();
    for (const auto& x : r.xi_star) xs.push_back(jpoint(x));
    json certs = json::array();
    for (const auto& c : r.degree_certificates) certs.push_back(certificate_json(c));
    return {{"mode", r.mode == ReducedMode::Minimization ? "min" : "degree"},
            {"d_star", r.d_star},
            {"delta_star", r.delta_star},
            {"lambdas", r.lambdas},
            {"mus", r.mus},
            {"xi_star", xs},
            {"residuals", r.residuals},
            {"psi_exponents", r.psi_exponents},
            {"psi_prefactors", r.psi_prefactors},
            {"psi_at_star", r.psi_at_star},
            {"min_boundary_margin", r.min_boundary_margin},
            {"degree_certificates", certs}};
}

// ---------------------------------------------------------------- subcommands

int cmd_constants(const Common& c, bool as_json) {
    const auto& k = constants();
    json params = {{"json", as_json}};
    json r = report_header("constants", c, params, nullptr);
    json sig = json::array();
    for (int j = 0; j < 5; ++j) sig.push_back(k.sigma(j, j));
    r["result"] = {{"c4", k.c4},        {"omega3", k.omega3},           {"alpha4", k.alpha4},
                   {"A", k.A},          {"I_3", k.I3},                   {"I_4", k.I4},
                   {"leading_level", k.leading_level()}, {"lambda1_unit_ball", lambda1_ball(1.0)},
                   {"sigma_diagonal", sig}};
    if (as_json) {
        write_output(c.out, dump(r));
    } else {
        std::ostringstream os;
        for (const auto& [key, v] : r["result"].items()) {
            if (v.is_number()) os << key << " " << g17(v.get<double>()) << "\n";
        }
        for (int j = 0; j < 5; ++j) os << "sigma_" << j << j << " " << g17(k.sigma(j, j)) << "\n";
        write_output(c.out, os.str());
    }
    return kOk;
}

int cmd_robin(const Common& c, const std::string& domain_file, int grid, double tube) {
    if (grid < 1) throw ConfigError("--grid must be positive");
    const LoadedDomain ld = load_domain(domain_file);
    RobinEvaluator ev(ld.domain);
    const Box bb = ld.domain.bounding_box();
    const double floor = tube * ld.domain.inradius();
    std::vector<Point> pts;
    const int n = grid;
    for (long long idx = 0; idx < static_cast<long long>(n) * n * n * n; ++idx) {
        long long r = idx;
        Point p;
        for (int d = 3; d >= 0; --d) {
            p(d) = bb.lo(d) + (static_cast<double>(r % n) + 0.5) / n * (bb.hi(d) - bb.lo(d));
            r /= n;
        }
        if (ld.domain.margin(p) > floor) pts.push_back(p);
    }
    std::vector<double> tau(pts.size());
    std::vector<Point> grad(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        tau[i] = ev.robin(pts[i]);
        grad[i] = ev.robin_grad(pts[i]);
    });
    json params = {{"grid", grid}, {"tube", tube}, {"points", pts.size()}};
    json r = report_header("robin", c, params, &ld);
    if (c.format == "csv") {
        std::ostringstream os;
        os << csv_preamble(r) << "x1,x2,x3,x4,tau,g1,g2,g3,g4\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (int d = 0; d < 4; ++d) os << g17(pts[i](d)) << ",";
            os << g17(tau[i]);
            for (int d = 0; d < 4; ++d) os << "," << g17(grad[i](d));
            os << "\n";
        }
        write_output(c.out, os.str());
    } else {
        json rows = json::array();
        for (std::size_t i = 0; i < pts.size(); ++i)
            rows.push_back({{"x", jpoint(pts[i])}, {"tau", tau[i]}, {"grad", jpoint(grad[i])}});
        r["result"] = {{"rows", rows}};
        write_output(c.out, dump(r));
    }
    return kOk;
}

int cmd_critical(const Common& c, const std::string& domain_file, const std::vector<double>& box, bool certify,
                 int starts, int face_grid, double safety_margin) {
    const LoadedDomain ld = load_domain(domain_file);
    RobinEvaluator ev(ld.domain);
    DegreeOptions dopt;
    dopt.face_grid = face_grid;
    dopt.safety_margin = safety_margin;
    dopt.search.starts_per_box = starts;
    dopt.search.seed = c.seed;
    json params = {{"box", box},
                   {"certify", certify},
                   {"starts_per_box", starts},
                   {"face_grid", face_grid},
                   {"safety_margin", safety_margin},
                   {"step_accept", dopt.search.step_accept},
                   {"degeneracy_threshold", dopt.search.degeneracy_threshold}};
    json r = report_header("critical-points", c, params, &ld);
    json res;
    bool pass = true;
    if (!box.empty()) {
        const Box b = box_from(box, 0);
        json pts = json::array();
        for (const auto& p : find_robin_critical_points(ev, {b}, dopt.search)) pts.push_back(critical_json(p));
        res["critical_points"] = pts;
        if (certify) {
            try {
                res["certificate"] = certificate_json(brouwer_degree(ev, b, dopt));
            } catch (const NotCertifiableError& e) {
                res["certificate"] = nullptr;
                res["certification_failure"] = e.what();
                pass = false;
            }
        }
    } else {
        const DegreeScan scan = scan_degrees(ev, default_scan_starts(ld.domain), dopt);
        json cands = json::array(), certs = json::array();
        for (const auto& p : scan.candidates) cands.push_back(critical_json(p));
        int nonzero = 0;
        for (const auto& ct : scan.certificates) {
            certs.push_back(certificate_json(ct));
            nonzero += ct.degree != 0;
        }
        res["candidates"] = cands;
        res["certificates"] = certs;
        res["failures"] = scan.failures;
        res["nonzero_degree_boxes"] = nonzero;
        pass = !certify || scan.failures.empty();
    }
    r["result"] = res;
    r["pass"] = pass;
    write_output(c.out, dump(r));
    return pass ? kOk : kVerification;
}

struct ProjectRow {
    double delta, defect, ratio, residual;
    Point location;
};

std::vector<ProjectRow> projection_rows(const RobinEvaluator& ev, const Point& xi, const std::vector<double>& deltas,
                                        int component, std::size_t grid_points) {
    std::vector<ProjectRow> rows;
    for (double d : deltas) {
        BubbleParams b;
        b.delta = d;
        b.xi = xi;
        const ProjectionDefect pd = projection_defect(ev, b, component, grid_points);
        rows.push_back({d, pd.value, pd.value / d, pd.exact_residual, pd.location});
    }
    return rows;
}

bool ratios_decreasing(const std::vector<ProjectRow>& rows) {
    // along decreasing δ
    std::vector<ProjectRow> s = rows;
    std::sort(s.begin(), s.end(), [](const ProjectRow& a, const ProjectRow& b) { return a.delta > b.delta; });
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i].ratio < s[i - 1].ratio)) return false;
    return true;
}

int cmd_project(const Common& c, const std::string& domain_file, std::vector<double> xi_in,
                const std::vector<double>& deltas, int component, std::size_t grid_points) {
    const LoadedDomain ld = load_domain(domain_file);
    RobinEvaluator ev(ld.domain);
    if (component < -1 || component > 4) throw ConfigError("--component must be -1 (U) or 0..4");
    Point xi = ld.domain.interior_point();
    if (!xi_in.empty()) xi = Point(xi_in[0], xi_in[1], xi_in[2], xi_in[3]);
    const auto rows = projection_rows(ev, xi, deltas, component, grid_points);
    const bool pass = ratios_decreasing(rows);
    json params = {{"xi", jpoint(xi)}, {"deltas", deltas}, {"component", component}, {"grid_points", grid_points}};
    json r = report_header("project-check", c, params, &ld);
    if (c.format == "csv") {
        std::ostringstream os;
        os << csv_preamble(r) << "# defect/delta decreasing: " << (pass ? "yes" : "no") << "\n";
        os << "delta,defect,defect_over_delta,exact_residual,x1,x2,x3,x4\n";
        for (const auto& row : rows) {
            os << g17(row.delta) << "," << g17(row.defect) << "," << g17(row.ratio) << "," << g17(row.residual);
            for (int d = 0; d < 4; ++d) os << "," << g17(row.location(d));
            os << "\n";
        }
        write_output(c.out, os.str());
    } else {
        json a = json::array();
        for (const auto& row : rows)
            a.push_back({{"delta", row.delta},
                         {"defect", row.defect},
                         {"defect_over_delta", row.ratio},
                         {"exact_residual", row.residual},
                         {"location", jpoint(row.location)}});
        r["result"] = {{"rows", a}, {"defect_over_delta_decreasing", pass}};
        r["pass"] = pass;
        write_output(c.out, dump(r));
    }
    return pass ? kOk : kVerification;
}

std::vector<AsymptoticFitReport> run_lemma(const std::string& lemma, const LoadedDomain* ld, const RobinEvaluator* ev,
                                           const QuadratureSpec& spec, std::size_t samples, int reseeds,
                                           std::uint64_t seed) {
    if (lemma == "A3") return lemma_a3_suite(samples, reseeds, seed);
    if (!ld) throw ConfigError("--domain is required for lemma " + lemma);
    if (lemma == "A2") return lemma_a2_suite(ld->domain, spec);
    if (lemma == "A4") return lemma_a4_suite(ld->domain, spec);
    if (lemma == "A5") return lemma_a5_suite(*ev, spec);
    throw ConfigError("--lemma must be A2, A3, A4 or A5, got '" + lemma + "'");
}

int cmd_asymptotics(const Common& c, const std::string& lemma, const std::string& domain_file, const QuadratureSpec& spec,
                    std::size_t samples, int reseeds) {
    std::optional<LoadedDomain> ld;
    std::optional<RobinEvaluator> ev;
    if (lemma != "A3" || !domain_file.empty()) {
        ld = load_domain(domain_file);
        ev.emplace(ld->domain);
    }
    const auto reports = run_lemma(lemma, ld ? &*ld : nullptr, ev ? &*ev : nullptr, spec, samples, reseeds, c.seed);
    json params = {{"lemma", lemma}, {"quadrature", quad_spec_json(spec)}, {"samples", samples}, {"reseeds", reseeds}};
    json r = report_header("asymptotics", c, params, ld ? &*ld : nullptr);
    json a = json::array();
    bool pass = true;
    for (const auto& rep : reports) {
        a.push_back(fit_json(rep));
        pass = pass && rep.pass;
    }
    r["result"] = {{"reports", a}};
    r["pass"] = pass;
    write_output(c.out, dump(r));
    return pass ? kOk : kVerification;
}

int cmd_reduced(const Common& c, const std::string& domain_file, const std::string& ensemble_file,
                const std::string& mode_text, bool energy, int starts, const QuadratureSpec& spec) {
    const LoadedDomain ld = load_domain(domain_file);
    if (ensemble_file.empty()) throw ConfigError("--ensemble is required");
    if (!std::filesystem::exists(ensemble_file)) throw ConfigError("ensemble file '" + ensemble_file + "' does not exist");
    ReducedMode mode;
    if (mode_text == "min") mode = ReducedMode::Minimization;
    else if (mode_text == "degree") mode = ReducedMode::Degree;
    else throw ConfigError("--mode must be min or degree, got '" + mode_text + "'");

    const KeyValues kv = KeyValues::load(ensemble_file);
    const long long m = kv.get_int("m");
    if (m < 1) throw ConfigError(ensemble_file + ": key 'm' must be at least 1");
    const auto lambdas = kv.get_list("lambdas");
    const auto mus = kv.get_list("mus");
    const double eta = kv.get_double("eta", 0.1);
    const auto boxes_raw = kv.get_list("boxes");
    std::optional<double> beta_const;
    std::string schedule_text;
    if (kv.has("beta")) beta_const = kv.get_double("beta");
    if (kv.has("beta_schedule")) schedule_text = kv.get_string("beta_schedule");
    if (!beta_const && schedule_text.empty()) throw ConfigError(ensemble_file + ": missing key 'beta' (or 'beta_schedule')");
    if (beta_const && !schedule_text.empty()) throw ConfigError(ensemble_file + ": give either 'beta' or 'beta_schedule', not both");
    const auto lambda_grid = kv.get_list("lambda_grid", {});
    const auto deltas = kv.get_list("deltas", {});
    const auto xis_raw = kv.get_list("xis", {});
    kv.reject_unknown();

    const auto M = static_cast<std::size_t>(m);
    if (lambdas.size() != M) throw ConfigError(ensemble_file + ": key 'lambdas' needs " + std::to_string(M) + " values");
    if (mus.size() != M) throw ConfigError(ensemble_file + ": key 'mus' needs " + std::to_string(M) + " values");
    if (boxes_raw.size() != 10 * M)
        throw ConfigError(ensemble_file + ": key 'boxes' needs 10 values per spike (d_lo, d_hi, 4 lower, 4 upper)");
    std::vector<SpikeBox> boxes;
    for (std::size_t i = 0; i < M; ++i) {
        SpikeBox b;
        b.d_lo = boxes_raw[10 * i];
        b.d_hi = boxes_raw[10 * i + 1];
        if (!(b.d_lo < b.d_hi)) throw ConfigError(ensemble_file + ": key 'boxes': d_lo must be below d_hi");
        b.xi_box = box_from(boxes_raw, 10 * i + 2);
        boxes.push_back(b);
    }

    RobinEvaluator ev(ld.domain);
    ReducedOptions ro;
    ro.starts = starts;
    ro.seed = c.seed;
    const CriticalPointReport rep = solve_reduced_system(ev, lambdas, mus, boxes, mode, eta, ro);

    json params = {{"ensemble_file", ensemble_file},
                   {"ensemble", json::object()},
                   {"mode", mode_text},
                   {"energy", energy},
                   {"starts", starts},
                   {"tolerance", ro.tolerance},
                   {"probes_per_dim", ro.probes_per_dim},
                   {"quadrature", quad_spec_json(spec)}};
    for (const auto& [k, v] : kv.entries()) params["ensemble"][k] = v;
    json r = report_header("reduced-energy", c, params, &ld);
    json res;
    res["critical_point"] = reduced_json(rep);

    // rate constants at the located ξ*
    const auto& K = constants();
    std::vector<double> taus;
    for (const auto& x : rep.xi_star) taus.push_back(ev.robin(x));
    const double lam_max = *std::max_element(lambdas.begin(), lambdas.end());
    const double rate_c = K.c4 / K.omega3 * K.A * K.A * *std::min_element(taus.begin(), taus.end());
    const BetaSchedule schedule =
        beta_const ? BetaSchedule::parse("const:" + g17(*beta_const), rate_c) : BetaSchedule::parse(schedule_text, rate_c);
    std::vector<double> grid = lambda_grid;
    if (grid.empty())
        for (int k = 0; k < 5; ++k) grid.push_back(lam_max * std::pow(0.5, k));
    const BetaAdmissibility adm = beta_admissible(schedule, grid, taus);
    res["beta"] = {{"schedule", schedule.description},
                   {"beta_at_lambda_max", schedule.beta(lam_max)},
                   {"lambda_grid", adm.lambdas},
                   {"rate_constants", adm.rate_constants},
                   {"log10_ratio_exp", adm.log10_ratio_exp},
                   {"log10_ratio_d2", adm.log10_ratio_d2},
                   {"log10_ratio_b2d2", adm.log10_ratio_b2d2},
                   {"margin", adm.margin},
                   {"admissible", adm.admissible},
                   {"reason", adm.reason}};

    if (energy) {
        if (deltas.size() != M || xis_raw.size() != 4 * M)
            throw ConfigError(ensemble_file + ": --energy needs keys 'deltas' (m values) and 'xis' (4m values)");
        SpikeEnsemble ens;
        for (std::size_t i = 0; i < M; ++i) {
            BubbleParams b;
            b.delta = deltas[i];
            b.mu = mus[i];
            b.xi = Point(xis_raw[4 * i], xis_raw[4 * i + 1], xis_raw[4 * i + 2], xis_raw[4 * i + 3]);
            ens.bubbles.push_back(b);
        }
        ens.lambdas = lambdas;
        ens.beta = schedule.beta(lam_max);
        ens.eta = eta;
        EnergyOptions eo;
        eo.quadrature = spec;
        const EnergyBreakdown ea = energy_terms_asymptotic(ev, ens, eo);
        const EnergyBreakdown eq = energy_terms_quadrature(ev, ens, eo);
        const double diff = std::abs(ea.total() - eq.total());
        const double bound = 0.02 * ea.leading_level + eq.total_error();
        res["energy"] = {{"asymptotic", breakdown_json(ea)},
                         {"quadrature", breakdown_json(eq)},
                         {"difference", diff},
                         {"bound", bound},
                         {"within_bound", diff <= bound}};
    }
    r["result"] = res;
    r["pass"] = true;
    write_output(c.out, dump(r));
    return kOk;
}

int cmd_radial(const Common& c, const std::vector<double>& lambdas, double mu) {
    const ConcentrationReport rep = concentration_study(lambdas, mu);
    json params = {{"lambdas", lambdas}, {"mu", mu}, {"u0_min", SolveOptions{}.u0_min},
                   {"u0_factor", SolveOptions{}.factor}, {"r0", ShootOptions{}.r0}};
    json r = report_header("radial-study", c, params, nullptr);
    const bool pass = rep.pass() || rep.hard_property();
    for (const auto& f : rep.flags) std::cerr << "radial-study: " << f << "\n";
    if (c.format == "csv") {
        std::ostringstream os;
        os << csv_preamble(r);
        os << "# fit: d0=" << g17(rep.d0) << " slope=" << g17(rep.slope) << " d_theory=" << g17(rep.d_theory) << "\n";
        for (const auto& f : rep.flags) os << "# flag: " << f << "\n";
        os << "lambda,u0,delta_eff,d_lambda,energy\n";
        for (const auto& row : rep.rows) {
            if (!row.used) continue;
            os << g17(row.lambda) << "," << g17(row.u0) << "," << g17(row.delta_eff) << "," << g17(row.d_lambda) << ","
               << g17(row.energy) << "\n";
        }
        write_output(c.out, os.str());
    } else {
        json rows = json::array();
        for (const auto& row : rep.rows)
            rows.push_back({{"lambda", row.lambda}, {"u0", row.u0}, {"delta_eff", row.delta_eff},
                            {"d_lambda", row.d_lambda}, {"energy", row.energy}, {"residual", row.residual},
                            {"used", row.used}, {"status", row.status}});
        r["result"] = {{"rows", rows},
                       {"d0", rep.d0},
                       {"slope", rep.slope},
                       {"fit_residual", rep.fit_residual},
                       {"d_theory", rep.d_theory},
                       {"intercept_rel_error", rep.intercept_rel_error},
                       {"intercept_pass", rep.intercept_pass},
                       {"d_positive", rep.d_positive},
                       {"delta_decreasing", rep.delta_decreasing},
                       {"log_increasing", rep.log_increasing},
                       {"log_convex", rep.log_convex},
                       {"energy_rel_error", rep.energy_rel_error},
                       {"energy_pass", rep.energy_pass},
                       {"hard_property", rep.hard_property()},
                       {"flags", rep.flags}};
        r["pass"] = pass;
        write_output(c.out, dump(r));
    }
    return pass ? kOk : kVerification;
}

int cmd_verify_all(const Common& c, const std::string& domain_file, const QuadratureSpec& spec, std::size_t samples) {
    const LoadedDomain ld = load_domain(domain_file);
    RobinEvaluator ev(ld.domain);
    const DomainDescriptor& dom = ld.domain;
    const Point center = dom.interior_point();
    const double room = std::min(1.0, dom.margin(center));
    json checks = json::array();
    bool all = true;
    auto add = [&](const std::string& name, bool pass, json details) {
        checks.push_back({{"name", name}, {"pass", pass}, {"details", std::move(details)}});
        all = all && pass;
        std::cerr << "verify-all: " << name << (pass ? " PASS" : " FAIL") << "\n";
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            add(name, false, {{"error", e.what()}});
        }
    };

    guarded("A1 projection defect", [&] {
        const std::vector<double> deltas{1e-1 * room, 1e-2 * room, 1e-3 * room};
        const auto rows = projection_rows(ev, center, deltas, -1, 4096);
        json a = json::array();
        for (const auto& row : rows) a.push_back({{"delta", row.delta}, {"defect", row.defect}, {"defect_over_delta", row.ratio}});
        add("A1 projection defect", ratios_decreasing(rows), {{"xi", jpoint(center)}, {"rows", a}});
    });
    for (const std::string lemma : {"A2", "A3", "A4", "A5"}) {
        guarded(lemma, [&] {
            const auto reports = run_lemma(lemma, &ld, &ev, spec, samples, 5, c.seed);
            json a = json::array();
            bool pass = true;
            for (const auto& rep : reports) {
                a.push_back(fit_json(rep));
                pass = pass && rep.pass;
            }
            add(lemma, pass, {{"reports", a}});
        });
    }
    const double w = 0.5 * dom.inradius();
    const Box xi_box{center - Point::Constant(w), center + Point::Constant(w)};
    guarded("psi stationarity", [&] {
        const double lambda = 0.1;
        const double d_guess = critical_d(lambda, ev.robin(center));
        const SpikeBox sb{0.8 * d_guess, 1.2 * d_guess, xi_box};
        ReducedOptions ro;
        ro.seed = c.seed;
        const auto rep = solve_reduced_system(ev, {lambda}, {1.0}, {sb}, ReducedMode::Minimization, 0.0, ro);
        const double expect = critical_d(lambda, ev.robin(rep.xi_star[0]));
        const double d_err = std::abs(rep.d_star[0] - expect);
        const double grad = ev.robin_grad(rep.xi_star[0]).norm();
        const bool pass = d_err <= 1e-6 && grad <= 1e-6 * std::max(1.0, ev.robin(rep.xi_star[0]));
        add("psi stationarity", pass,
            {{"lambda", lambda}, {"report", reduced_json(rep)}, {"d_error", d_err}, {"grad_tau_at_xi", grad}});
    });
    guarded("degree", [&] {
        const DegreeCertificate cert = brouwer_degree(ev, xi_box, DegreeOptions{});
        const bool pass = dom.closed_form() ? cert.degree == 1 : true;
        add("degree", pass, {{"certificate", certificate_json(cert)}, {"expected", dom.closed_form() ? json(1) : json(nullptr)}});
    });

    json params = {{"quadrature", quad_spec_json(spec)}, {"a3_samples", samples}, {"a3_reseeds", 5}};
    json r = report_header("verify-all", c, params, &ld);
    r["result"] = {{"checks", checks}};
    r["pass"] = all;
    write_output(c.out, dump(r));
    return all ? kOk : kVerification;
}

unsigned env_threads() {
    if (const char* s = std::getenv("SPIKELAB_THREADS")) {
        try {
            const long v = std::stol(s);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikelab: Robin functions, bubble projections, reduced energies and their numerical checks"};
    app.set_version_flag("--version", SPIKELAB_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: SPIKELAB_THREADS, else all cores)");
    app.add_option("--seed", common.seed, "seed for every randomized component");
    app.add_option("--out", common.out, "output file (default: stdout)");
    app.add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string domain_file;
    auto* c_const = app.add_subcommand("constants", "universal constants");
    bool as_json = false;
    c_const->add_flag("--json", as_json, "JSON instead of a text table");

    auto* c_robin = app.add_subcommand("robin", "tau and its gradient on a grid");
    int grid = 6;
    double tube = 0.05;
    c_robin->add_option("--domain", domain_file)->required();
    c_robin->add_option("--grid", grid, "cell-centred points per axis of the bounding box");
    c_robin->add_option("--tube", tube, "skip points closer than tube*inradius to the boundary");

    auto* c_crit = app.add_subcommand("critical-points", "critical points of tau and degree certificates");
    std::vector<double> box;
    bool certify = false;
    int starts = 16, face_grid = 4;
    double safety = 1e-7;
    c_crit->add_option("--domain", domain_file)->required();
    c_crit->add_option("--box", box, "lo1 lo2 lo3 lo4 hi1 hi2 hi3 hi4 (omit to scan the domain)")->expected(8);
    c_crit->add_flag("--certify", certify, "compute the Brouwer degree of the box");
    c_crit->add_option("--starts", starts, "Newton starts per box");
    c_crit->add_option("--face-grid", face_grid, "samples per dimension on each box face");
    c_crit->add_option("--safety-margin", safety, "required min |grad tau| on the box faces");

    auto* c_proj = app.add_subcommand("project-check", "projection defect between exact and expanded PU");
    std::vector<double> xi, deltas{1e-1, 1e-2, 1e-3};
    std::string deltas_text;
    int component = -1;
    std::size_t grid_points = 4096;
    c_proj->add_option("--domain", domain_file)->required();
    c_proj->add_option("--xi", xi, "bubble centre (default: interior point)")->expected(4);
    c_proj->add_option("--deltas", deltas_text, "comma separated concentration scales");
    c_proj->add_option("--component", component, "-1 for U, j for psi^j");
    c_proj->add_option("--grid-points", grid_points, "interior grid size");

    auto* c_asym = app.add_subcommand("asymptotics", "rate suites for the concentrated integral estimates");
    std::string lemma;
    std::size_t samples = 1000000;
    int reseeds = 5, radial_order = 16, inner_degree = 7;
    std::size_t outer_samples = 4096;
    c_asym->add_option("--lemma", lemma, "A2, A3, A4 or A5")->required();
    c_asym->add_option("--domain", domain_file);
    c_asym->add_option("--samples", samples, "A3 samples per reseeding");
    c_asym->add_option("--reseeds", reseeds, "A3 reseedings");
    c_asym->add_option("--radial-order", radial_order, "Gauss nodes per radial panel");
    c_asym->add_option("--inner-degree", inner_degree, "S3 rule degree inside spike balls");
    c_asym->add_option("--outer-samples", outer_samples, "ray directions outside spike balls");

    auto* c_red = app.add_subcommand("reduced-energy", "critical points of the reduced energy");
    std::string ensemble_file, mode_text = "min";
    bool energy = false;
    int red_starts = 32;
    c_red->add_option("--domain", domain_file)->required();
    c_red->add_option("--ensemble", ensemble_file)->required();
    c_red->add_option("--mode", mode_text, "min or degree");
    c_red->add_flag("--energy", energy, "also compare asymptotic and quadrature energy breakdowns");
    c_red->add_option("--starts", red_starts, "multistart count per spike");

    auto* c_rad = app.add_subcommand("radial-study", "radial solutions on the unit ball and their concentration");
    std::string lambdas_text = "8,7,6,5,4";
    double mu = 1.0;
    c_rad->add_option("--lambdas", lambdas_text, "decreasing comma separated lambda values");
    c_rad->add_option("--mu", mu);

    auto* c_all = app.add_subcommand("verify-all", "projection, rate suites, stationarity and degree checks");
    c_all->add_option("--domain", domain_file)->required();
    c_all->add_option("--samples", samples, "A3 samples per reseeding");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        common.threads = threads ? threads : env_threads();
        if (common.threads) set_thread_count(common.threads);
        const QuadratureSpec spec = quad_spec(common, radial_order, inner_degree, outer_samples);

        const bool format_given = app.count("--format") > 0;
        if (*c_const) return cmd_constants(common, as_json || (format_given && common.format == "json"));
        if (*c_robin) {
            if (!format_given) common.format = "csv";
            return cmd_robin(common, domain_file, grid, tube);
        }
        if (*c_crit) return cmd_critical(common, domain_file, box, certify, starts, face_grid, safety);
        if (*c_proj) {
            if (!format_given) common.format = "csv";
            if (!deltas_text.empty()) deltas = parse_real_list(deltas_text, "--deltas");
            return cmd_project(common, domain_file, xi, deltas, component, grid_points);
        }
        if (*c_asym) return cmd_asymptotics(common, lemma, domain_file, spec, samples, reseeds);
        if (*c_red) return cmd_reduced(common, domain_file, ensemble_file, mode_text, energy, red_starts, spec);
        if (*c_rad) {
            if (!format_given) common.format = "csv";
            return cmd_radial(common, parse_real_list(lambdas_text, "--lambdas"), mu);
        }
        if (*c_all) return cmd_verify_all(common, domain_file, spec, samples);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kVerification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
