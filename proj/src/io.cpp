#include "soliton/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "soliton/errors.hpp"

namespace soliton {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

namespace {

template <typename Range>
void write_row(std::ostream& out, const Range& fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out << ',';
        out << f;
        first = false;
    }
    out << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    write_row(out, kTrajectoryColumns);
    for (const auto& smp : traj.samples) {
        const auto& s = smp.state;
        const auto& d = smp.diag;
        const std::array<std::string, 22> row{
            format_double(s.t),    format_double(s.f),      format_double(s.fdot), format_double(s.h),
            format_double(s.hdot), format_double(s.u),      format_double(s.udot), format_double(d.xi),
            format_optional(d.W),  format_double(d.E),      format_double(d.F),    format_optional(d.theta),
            format_optional(d.G),  format_optional(d.Hcal), format_optional(d.Q),  format_optional(d.Lcal),
            format_double(d.Fcal), format_double(d.S),      format_double(d.trL),  format_double(d.ham_residual),
            format_double(d.normal_residual), format_double(smp.sol)};
        write_row(out, row);
    }
}

void write_scan_csv(std::ostream& out, const ScanResult& result) {
    write_row(out, kScanColumns);
    for (const auto& c : result.cells) {
        const std::string term = c.termination ? std::string(to_string(*c.termination)) : "error";
        const std::array<std::string, 5> row{format_double(c.hbar), format_double(c.ubar), format_double(c.min_sol),
                                             format_double(c.argmin_t), term};
        write_row(out, row);
    }
}

void write_slice_csv(std::ostream& out, const std::vector<SlicePoint>& slice) {
    out << "hbar,min_sol\n";
    for (const auto& p : slice) out << format_double(p.hbar) << ',' << format_double(p.min_sol) << '\n';
}

nlohmann::json clusters_json(const std::vector<Cluster>& clusters, double threshold) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : clusters) {
        list.push_back({{"centroid", {{"hbar", c.centroid_hbar}, {"ubar", c.centroid_ubar}}},
                        {"best", {{"hbar", c.best_hbar}, {"ubar", c.best_ubar}, {"min_sol", c.best_min_sol}}},
                        {"members", c.members.size()}});
    }
    return {{"threshold", threshold}, {"count", clusters.size()}, {"clusters", list}};
}

std::string scan_svg(const ScanResult& r, double threshold) {
    constexpr double W = 640, H = 480, margin = 50;
    const double h0 = r.grid.hbar.lo, h1 = std::max(r.grid.hbar.hi, h0 + 1e-12);
    const double u0 = r.grid.ubar.lo, u1 = std::max(r.grid.ubar.hi, u0 + 1e-12);
    auto px = [&](double h) { return margin + (h - h0) / (h1 - h0) * (W - 2 * margin); };
    auto py = [&](double u) { return H - margin - (u - u0) / (u1 - u0) * (H - 2 * margin); };
    auto num = [](double v) { return format_double(std::round(v * 100.0) / 100.0); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H) << "\">\n";
    os << "<rect x=\"" << num(margin) << "\" y=\"" << num(margin) << "\" width=\"" << num(W - 2 * margin)
       << "\" height=\"" << num(H - 2 * margin) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(W / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">hbar</text>\n";
    os << "<text x=\"14\" y=\"" << num(H / 2) << "\" transform=\"rotate(-90 14 " << num(H / 2)
       << ")\" text-anchor=\"middle\">ubar</text>\n";
    os << "<text x=\"" << num(margin) << "\" y=\"" << num(H - margin + 16) << "\">" << format_double(h0) << "</text>\n";
    os << "<text x=\"" << num(W - margin) << "\" y=\"" << num(H - margin + 16) << "\" text-anchor=\"end\">"
       << format_double(r.grid.hbar.hi) << "</text>\n";
    os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(H - margin) << "\" text-anchor=\"end\">"
       << format_double(u0) << "</text>\n";
    os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(margin + 10) << "\" text-anchor=\"end\">"
       << format_double(r.grid.ubar.hi) << "</text>\n";
    for (const auto& c : r.cells) {
        if (!(c.min_sol < threshold)) continue;
        // darker for smaller SOL
        const double shade = std::clamp(c.min_sol / threshold, 0.0, 1.0);
        const int level = static_cast<int>(std::lround(200.0 * shade));
        os << "<circle cx=\"" << num(px(c.hbar)) << "\" cy=\"" << num(py(c.ubar)) << "\" r=\"3\" fill=\"rgb("
           << level << ',' << level << ",255)\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

nlohmann::json to_json(const IntegratorConfig& c) {
    nlohmann::json j{{"step", c.step},
                     {"t_max", c.t_max},
                     {"blowup_threshold", c.blowup_threshold},
                     {"t0_factor", c.t0_factor},
                     {"record_every", c.record_every},
                     {"target_sol", c.target_sol},
                     {"extended_precision", c.extended_precision}};
    if (c.t0) j["t0"] = *c.t0;
    return j;
}

IntegratorConfig config_from_json(const nlohmann::json& j, IntegratorConfig c) {
    if (!j.is_object()) throw PreconditionError("integrator config must be a JSON object");
    c.step = j.value("step", c.step);
    c.t_max = j.value("t_max", c.t_max);
    c.blowup_threshold = j.value("blowup_threshold", c.blowup_threshold);
    c.t0_factor = j.value("t0_factor", c.t0_factor);
    c.record_every = j.value("record_every", c.record_every);
    c.target_sol = j.value("target_sol", c.target_sol);
    c.extended_precision = j.value("extended_precision", c.extended_precision);
    if (j.contains("t0")) c.t0 = j.at("t0").get<double>();
    return c;
}

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
    return {{"tool_version", kToolVersion}, {"command", m.command},   {"options", m.options},
            {"preset", m.preset},           {"config", m.config},     {"notes", m.notes},
            {"duration_seconds", m.duration_seconds}, {"outputs", outs}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.options = j.at("options");
    m.preset = j.value("preset", nlohmann::json());
    m.config = j.value("config", nlohmann::json());
    m.notes = j.value("notes", std::vector<std::string>{});
    m.duration_seconds = j.value("duration_seconds", 0.0);
    for (const auto& o : j.value("outputs", nlohmann::json::array()))
        m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    return m;
}

OutputDigest write_output(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << data;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
    return {path, sha256_hex(data)};
}

}  // namespace soliton
