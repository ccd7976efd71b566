#include "soliton/shooting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace soliton {

std::size_t AxisRange::count() const {
    if (!(step > 0.0) || hi < lo) return 0;
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

AxisRange parse_range(const std::string& text) {
    AxisRange r;
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    char c1 = 0, c2 = 0;
    if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof() || !(r.step > 0.0))
        throw PreconditionError("expected a range lo:hi:step with step > 0, got '" + text + "'");
    return r;
}

std::vector<std::string> clamp_grid(ScanGrid& grid, const OrbitPreset& preset) {
    std::vector<std::string> notes;
    const double bound = -preset.ubar_lower_bound();
    auto note = [&](const std::string& axis, double from, double to) {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << axis << " clamped from " << from << " to " << to;
        notes.push_back(os.str());
    };
    if (grid.ubar.lo < -bound) {
        // keep the lattice: move lo up by whole steps
        const double k = std::ceil((-bound - grid.ubar.lo) / grid.ubar.step - 1e-9);
        const double lo = grid.ubar.lo + k * grid.ubar.step;
        note("ubar lower end", grid.ubar.lo, lo);
        grid.ubar.lo = lo;
    }
    if (grid.ubar.hi > bound) {
        note("ubar upper end", grid.ubar.hi, bound);
        grid.ubar.hi = bound;
    }
    if (grid.hbar.lo <= 0.0) {
        const double k = std::floor(-grid.hbar.lo / grid.hbar.step + 1e-9) + 1.0;
        const double lo = grid.hbar.lo + k * grid.hbar.step;
        note("hbar lower end", grid.hbar.lo, lo);
        grid.hbar.lo = lo;
    }
    return notes;
}

namespace {

// Runs work(k) for k in [0, n) on a small pool; each k is written by exactly one worker.
template <typename Work>
void parallel_for(std::size_t n, unsigned threads, Work&& work) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) work(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) work(k);
        });
}

ScanCell evaluate_cell(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config) {
    ScanCell cell{hbar, ubar, 0.0, 0.0, std::nullopt, {}};
    try {
        const auto shot = shoot(preset, hbar, ubar, config);
        cell.min_sol = shot.min_sol;
        cell.argmin_t = shot.argmin_sol_t;
        cell.termination = shot.termination;
    } catch (const std::exception& e) {
        cell.min_sol = std::numeric_limits<double>::infinity();
        cell.argmin_t = std::numeric_limits<double>::quiet_NaN();
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

ScanResult scan(const OrbitPreset& preset, const ScanGrid& grid, const IntegratorConfig& config, unsigned threads) {
    preset.validate();
    config.validate();
    ScanResult result{preset, config, grid, grid.hbar.count(), grid.ubar.count(), {}};
    result.cells.resize(result.n_hbar * result.n_ubar);
    parallel_for(result.cells.size(), threads, [&](std::size_t k) {
        const std::size_t i = k / result.n_ubar;
        const std::size_t j = k % result.n_ubar;
        result.cells[k] = evaluate_cell(preset, grid.hbar.at(i), grid.ubar.at(j), config);
    });
    return result;
}

std::vector<Cluster> find_clusters(const ScanResult& result, double threshold) {
    const std::size_t nh = result.n_hbar, nu = result.n_ubar;
    std::vector<int> label(result.cells.size(), -1);
    auto below = [&](std::size_t k) { return result.cells[k].min_sol < threshold; };

    std::vector<Cluster> clusters;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < result.cells.size(); ++start) {
        if (label[start] >= 0 || !below(start)) continue;
        const int id = static_cast<int>(clusters.size());
        Cluster cl;
        cl.best_min_sol = std::numeric_limits<double>::infinity();
        double wsum = 0.0, hsum = 0.0, usum = 0.0;
        label[start] = id;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            const std::size_t i = k / nu, j = k % nu;
            const auto& cell = result.cells[k];
            cl.members.push_back({i, j});
            const double w = threshold - cell.min_sol;
            wsum += w;
            hsum += w * cell.hbar;
            usum += w * cell.ubar;
            if (cell.min_sol < cl.best_min_sol) {
                cl.best_min_sol = cell.min_sol;
                cl.best_hbar = cell.hbar;
                cl.best_ubar = cell.ubar;
            }
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ni = static_cast<long>(i) + di, nj = static_cast<long>(j) + dj;
                    if (ni < 0 || nj < 0 || ni >= static_cast<long>(nh) || nj >= static_cast<long>(nu)) continue;
                    const std::size_t nk = static_cast<std::size_t>(ni) * nu + static_cast<std::size_t>(nj);
                    if (label[nk] < 0 && below(nk)) {
                        label[nk] = id;
                        stack.push_back(nk);
                    }
                }
        }
        std::sort(cl.members.begin(), cl.members.end(),
                  [](const GridIndex& a, const GridIndex& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
        cl.centroid_hbar = hsum / wsum;
        cl.centroid_ubar = usum / wsum;
        clusters.push_back(std::move(cl));
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Cluster& a, const Cluster& b) { return a.best_min_sol < b.best_min_sol; });
    return clusters;
}

std::vector<SlicePoint> einstein_slice(const OrbitPreset& preset, const AxisRange& hbar,
                                       const IntegratorConfig& config, unsigned threads) {
    ScanGrid grid{hbar, AxisRange{0.0, 0.0, 1.0}};
    clamp_grid(grid, preset);
    const auto result = scan(preset, grid, config, threads);
    std::vector<SlicePoint> out;
    out.reserve(result.cells.size());
    for (const auto& c : result.cells) out.push_back({c.hbar, c.min_sol});
    return out;
}

std::vector<SlicePoint> slice_minima(const std::vector<SlicePoint>& slice) {
    std::vector<SlicePoint> out;
    for (std::size_t k = 1; k + 1 < slice.size(); ++k)
        if (slice[k].min_sol < slice[k - 1].min_sol && slice[k].min_sol <= slice[k + 1].min_sol)
            out.push_back(slice[k]);
    std::sort(out.begin(), out.end(), [](const SlicePoint& a, const SlicePoint& b) { return a.min_sol < b.min_sol; });
    return out;
}

RefineResult refine(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config,
                    const RefineOptions& options) {
    RefineResult r;
    auto objective = [&](double h, double u) {
        ++r.evaluations;
        if (!(h > 0.0) || u < preset.ubar_lower_bound()) return std::numeric_limits<double>::infinity();
        try {
            return shoot(preset, h, u, config).min_sol;
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    r.hbar = hbar;
    r.ubar = ubar;
    r.min_sol = r.seed_min_sol = objective(hbar, ubar);

    constexpr double kInvPhi = 0.6180339887498949;
    double width[2] = {options.hbar_width, options.ubar_width};

    // Golden-section search on one coordinate around the incumbent.
    auto line_search = [&](int axis) {
        double lo = (axis == 0 ? r.hbar : r.ubar) - width[axis];
        double hi = (axis == 0 ? r.hbar : r.ubar) + width[axis];
        auto eval = [&](double x) { return axis == 0 ? objective(x, r.ubar) : objective(r.hbar, x); };
        double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
        double f1 = eval(x1), f2 = eval(x2);
        double best_x = f1 < f2 ? x1 : x2, best_f = std::min(f1, f2);
        for (int it = 0; it < 24 && r.evaluations < options.max_evaluations; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kInvPhi * (hi - lo);
                f1 = eval(x1);
                if (f1 < best_f) best_x = x1, best_f = f1;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kInvPhi * (hi - lo);
                f2 = eval(x2);
                if (f2 < best_f) best_x = x2, best_f = f2;
            }
            if (hi - lo < 1e-7) break;
        }
        if (best_f < r.min_sol) {
            r.min_sol = best_f;
            (axis == 0 ? r.hbar : r.ubar) = best_x;
        }
    };

    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
        if (r.evaluations >= options.max_evaluations) break;
        line_search(0);
        if (!options.fix_ubar && r.evaluations < options.max_evaluations) line_search(1);
        width[0] *= 0.5;
        width[1] *= 0.5;
    }
    r.budget_exhausted = r.evaluations >= options.max_evaluations;
    return r;
}

}  // namespace soliton
