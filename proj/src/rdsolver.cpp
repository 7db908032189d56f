#include <fragrd/rdsolver.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace fragrd::rd {

namespace {

struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v)
    {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

void check_pde_dim(int dim)
{
    if (dim != 1 && dim != 2)
        throw ConfigError("rdsolver: the PDE is solved for N = 1 or 2 only");
}

void check_range(const Field& field)
{
    double lo = 0.0, hi = 1.0;
    bool nan = false;
    for (double v : field.u) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        nan |= v != v;
    }
    if (lo >= -kRangeSlack && hi <= 1.0 + kRangeSlack && !nan)
        return;
    for (std::size_t i = 0; i < field.u.size(); ++i) {
        const double v = field.u[i];
        if (!(v >= -kRangeSlack && v <= 1.0 + kRangeSlack)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "rdsolver: u = %.17g at cell %zu, t = %.6g left [0,1]", v, i, field.t);
            throw SolverAbort(buf);
        }
    }
}

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double Field::sup() const
{
    double m = -std::numeric_limits<double>::infinity();
    for (double v : u)
        m = std::max(m, v);
    return m;
}

double Field::inf() const
{
    double m = std::numeric_limits<double>::infinity();
    for (double v : u)
        m = std::min(m, v);
    return m;
}

double Field::mass() const
{
    KahanSum s;
    for (double v : u)
        s.add(v);
    return s.sum * std::pow(grid.h, grid.dim);
}

Point Field::center_of_mass() const
{
    std::array<KahanSum, kMaxDim> m{};
    KahanSum total;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0)
            continue;
        const Point c = grid.center(i);
        total.add(u[i]);
        for (int k = 0; k < grid.dim; ++k)
            m[k].add(u[i] * c[k]);
    }
    Point out{};
    if (total.sum <= 0.0) {
        const auto b = grid.bounds();
        for (int k = 0; k < grid.dim; ++k)
            out[k] = 0.5 * (b.lo[k] + b.hi[k]);
        return out;
    }
    for (int k = 0; k < grid.dim; ++k)
        out[k] = m[k].sum / total.sum;
    return out;
}

std::string scheme_name(Scheme s)
{
    return s == Scheme::Explicit ? "explicit" : "semi-implicit";
}

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Extinction: return "Extinction";
    case Verdict::Invasion: return "Invasion";
    default: return "Undecided";
    }
}

Verdict parse_verdict(const std::string& name)
{
    if (name == "Extinction") return Verdict::Extinction;
    if (name == "Invasion") return Verdict::Invasion;
    if (name == "Undecided") return Verdict::Undecided;
    throw ConfigError("unknown verdict '" + name + "'");
}

nlohmann::json SolverConfig::to_json() const
{
    return {{"scheme", scheme_name(scheme)},
            {"h", h},
            {"dt", dt},
            {"L_dom", L_dom},
            {"T_max", T_max},
            {"check_interval", check_interval},
            {"snapshot_times", snapshot_times},
            {"extinction_margin", extinction_margin},
            {"invasion_radius", invasion_radius},
            {"invasion_level", invasion_level},
            {"window", window},
            {"front_level", front_level},
            {"boundary_margin", boundary_margin},
            {"small_mass_shortcut", small_mass_shortcut},
            {"reaction", reaction},
            {"supersampling", supersampling},
            {"stop_at_certificate", stop_at_certificate}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& doc)
{
    if (!doc.is_object())
        throw ConfigError("solver block must be an object");
    SolverConfig c;
    for (const auto& [key, v] : doc.items()) {
        try {
            if (key == "scheme") {
                const auto s = v.get<std::string>();
                if (s == "explicit") c.scheme = Scheme::Explicit;
                else if (s == "semi-implicit") c.scheme = Scheme::SemiImplicit;
                else throw ConfigError("solver: unknown scheme '" + s + "'");
            }
            else if (key == "h") c.h = v.get<double>();
            else if (key == "dt") c.dt = v.get<double>();
            else if (key == "L_dom") c.L_dom = v.get<double>();
            else if (key == "T_max") c.T_max = v.get<double>();
            else if (key == "check_interval") c.check_interval = v.get<double>();
            else if (key == "snapshot_times") c.snapshot_times = v.get<std::vector<double>>();
            else if (key == "extinction_margin") c.extinction_margin = v.get<double>();
            else if (key == "invasion_radius") c.invasion_radius = v.get<double>();
            else if (key == "invasion_level") c.invasion_level = v.get<double>();
            else if (key == "window") c.window = v.get<int>();
            else if (key == "front_level") c.front_level = v.get<double>();
            else if (key == "boundary_margin") c.boundary_margin = v.get<double>();
            else if (key == "small_mass_shortcut") c.small_mass_shortcut = v.get<bool>();
            else if (key == "reaction") c.reaction = v.get<bool>();
            else if (key == "supersampling") c.supersampling = v.get<int>();
            else if (key == "stop_at_certificate") c.stop_at_certificate = v.get<bool>();
            else throw ConfigError("solver: unknown field '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("solver: field '" + key + "': " + e.what());
        }
    }
    return c;
}

void SolverConfig::validate(const BistableReaction& f, int dim) const
{
    check_pde_dim(dim);
    if (!(h > 0)) throw ConfigError("solver: h must be positive");
    if (!(dt >= 0)) throw ConfigError("solver: dt must be >= 0");
    if (!(L_dom >= 0)) throw ConfigError("solver: L_dom must be >= 0");
    if (!(T_max > 0)) throw ConfigError("solver: T_max must be positive");
    if (!(check_interval > 0)) throw ConfigError("solver: check_interval must be positive");
    if (!(extinction_margin > 0 && extinction_margin < 1))
        throw ConfigError("solver: extinction_margin must lie in (0,1)");
    if (!(invasion_level > 0 && invasion_level < 1)) throw ConfigError("solver: invasion_level must lie in (0,1)");
    if (!(front_level > 0 && front_level < 1)) throw ConfigError("solver: front_level must lie in (0,1)");
    if (!(invasion_radius >= 0)) throw ConfigError("solver: invasion_radius must be >= 0");
    if (!(boundary_margin >= 0)) throw ConfigError("solver: boundary_margin must be >= 0");
    if (window < 1) throw ConfigError("solver: window must be >= 1");
    if (supersampling < 1) throw ConfigError("solver: supersampling must be >= 1");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double t = snapshot_times[i];
        if (!(t >= 0 && t <= T_max)) throw ConfigError("solver: snapshot times must lie in [0, T_max]");
        if (i > 0 && !(t > snapshot_times[i - 1]))
            throw ConfigError("solver: snapshot times must be strictly increasing");
    }
    if (dt > 0) {
        const double mp = reaction ? f.m_prime() : 0.0;
        if (scheme == Scheme::Explicit) {
            const double cap = 0.9 * std::min(h * h / (2 * dim), mp > 0 ? 1 / (2 * mp) : 1e300);
            if (dt > cap * (1 + 1e-12))
                throw ConfigError("solver: explicit dt exceeds 0.9 min(h^2/(2N), 1/(2M'))");
            if (dt * (2 * dim / (h * h) + mp) > 1 + 1e-12)
                throw ConfigError("solver: explicit dt breaks monotonicity (2N dt/h^2 + dt M' > 1)");
        } else if (dt * mp > 1 + 1e-12) {
            throw ConfigError("solver: semi-implicit dt breaks monotonicity of the reaction step (dt M' > 1)");
        }
    }
}

double diffusion_length(const BistableReaction& f)
{
    return 1.0 / std::sqrt(f.m_prime());
}

double required_half_width(double set_half_extent, const BistableReaction& f, const SolverConfig& cfg)
{
    const double c = cfg.reaction ? std::abs(exact_front_speed(f)) : 0.0;
    return set_half_extent + c * cfg.T_max + 10 * diffusion_length(f);
}

double resolved_dt(const BistableReaction& f, const SolverConfig& cfg, int dim)
{
    if (cfg.dt > 0)
        return cfg.dt;
    const double mp = cfg.reaction ? f.m_prime() : 0.0;
    const double h = cfg.h;
    if (cfg.scheme == Scheme::Explicit) {
        double dt = 0.9 * std::min(h * h / (2 * dim), mp > 0 ? 1 / (2 * mp) : 1e300);
        if (dt * (2 * dim / (h * h) + mp) > 1)
            dt = 0.9 / (2 * dim / (h * h) + mp);
        return dt;
    }
    return mp > 0 ? std::min(h, 0.9 / mp) : h;
}

Grid solver_grid(const geom::Bounds& b, int dim, const BistableReaction& f, const SolverConfig& cfg)
{
    cfg.validate(f, dim);
    if (b.empty(dim))
        throw GeometryError("rdsolver: initial set is empty");
    double max_half = 0.0;
    for (int k = 0; k < dim; ++k)
        max_half = std::max(max_half, 0.5 * b.extent(k));
    const double need = required_half_width(max_half, f, cfg);
    if (cfg.L_dom > 0 && cfg.L_dom < need)
        throw ConfigError("solver: L_dom = " + fmt17(cfg.L_dom) + " below the required half-width " + fmt17(need));
    Grid g;
    g.dim = dim;
    g.h = cfg.h;
    for (int k = 0; k < dim; ++k) {
        const double c = 0.5 * (b.lo[k] + b.hi[k]);
        const double half = cfg.L_dom > 0 ? cfg.L_dom : required_half_width(0.5 * b.extent(k), f, cfg);
        const auto lo = static_cast<std::int64_t>(std::floor((c - half) / cfg.h));
        const auto hi = static_cast<std::int64_t>(std::ceil((c + half) / cfg.h));
        g.first[k] = lo;
        g.extents[k] = hi - lo;
    }
    return g;
}

namespace {

double boundary_margin_of(const SolverConfig& cfg, const BistableReaction* f)
{
    if (cfg.boundary_margin > 0)
        return cfg.boundary_margin;
    return f ? 5 * diffusion_length(*f) : 0.0;
}

void check_inside(const geom::Bounds& set, const Grid& grid, double margin)
{
    const auto gb = grid.bounds();
    for (int k = 0; k < grid.dim; ++k)
        if (set.lo[k] < gb.lo[k] + margin || set.hi[k] > gb.hi[k] - margin)
            throw ConfigError("rdsolver: initial set touches the truncation boundary margin");
}

void check_amplitude(double amplitude)
{
    if (!(amplitude > 0 && amplitude <= 1))
        throw ConfigError("rdsolver: amplitude must lie in (0,1]");
}

} // namespace

Field init_field(const SetExpr& set, double amplitude, const Grid& grid, const SolverConfig& cfg)
{
    check_pde_dim(grid.dim);
    check_amplitude(amplitude);
    if (set.dim() != grid.dim)
        throw ConfigError("rdsolver: set and grid dimensions differ");
    check_inside(set.bounding_box(), grid, cfg.boundary_margin);
    const auto r = geom::rasterize_on(set, grid, cfg.supersampling);
    Field f;
    f.grid = grid;
    f.u = r.coverage;
    for (double& v : f.u)
        v *= amplitude;
    return f;
}

Field init_field(const SetExpr& set, double amplitude, const BistableReaction& f, const SolverConfig& cfg)
{
    const auto grid = solver_grid(set.bounding_box(), set.dim(), f, cfg);
    check_inside(set.bounding_box(), grid, boundary_margin_of(cfg, &f));
    return init_field(set, amplitude, grid, cfg);
}

Field init_field(const geom::RasterSet& set, double amplitude, const Grid& grid, const SolverConfig& cfg)
{
    check_pde_dim(grid.dim);
    check_amplitude(amplitude);
    if (!grid.contains(set.grid))
        throw ConfigError("rdsolver: raster is not on the solver lattice or exceeds the domain");
    geom::Bounds occupied = geom::Bounds{};
    bool any = false;
    for (std::size_t i = 0; i < set.coverage.size(); ++i) {
        if (set.coverage[i] <= 0)
            continue;
        const auto idx = set.grid.unflatten(i);
        for (int k = 0; k < grid.dim; ++k) {
            const double lo = set.grid.cell_lo(k, idx[k]);
            if (!any || lo < occupied.lo[k]) occupied.lo[k] = lo;
            if (!any || lo + grid.h > occupied.hi[k]) occupied.hi[k] = lo + grid.h;
        }
        any = true;
    }
    if (any)
        check_inside(occupied, grid, cfg.boundary_margin);
    const auto r = geom::resample(set, grid);
    Field f;
    f.grid = grid;
    f.u = r.coverage;
    for (double& v : f.u)
        v *= amplitude;
    return f;
}

Stepper::Stepper(const Grid& grid, const BistableReaction& f, const SolverConfig& cfg)
    : grid_(grid), f_(&f), cfg_(cfg)
{
    check_pde_dim(grid.dim);
    cfg_.validate(f, grid.dim);
    if (std::abs(grid.h - cfg.h) > 1e-12 * cfg.h)
        throw ConfigError("rdsolver: grid spacing differs from the configured h");
    dt_ = resolved_dt(f, cfg_, grid.dim);
    scratch_.resize(grid.size());
}

const Stepper::Tridiagonal& Stepper::factors(int axis, double r)
{
    Tridiagonal& t = tri_[axis];
    if (t.r == r)
        return t;
    const auto n = static_cast<std::size_t>(grid_.extents[axis]);
    t.r = r;
    t.cp.assign(n, 0.0);
    t.inv.assign(n, 1.0);
    if (n == 1)
        return t;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = (i == 0 || i + 1 == n) ? 1 + r : 1 + 2 * r;
        const double denom = i == 0 ? b : b - r * r * t.inv[i - 1];
        t.inv[i] = 1.0 / denom;
        t.cp[i] = -r * t.inv[i];
    }
    return t;
}

void Stepper::implicit_diffusion(Field& field, double dt)
{
    const double r = dt / (grid_.h * grid_.h);
    double* u = field.u.data();
    const auto n0 = static_cast<std::size_t>(grid_.extents[0]);
    const auto n1 = grid_.dim == 2 ? static_cast<std::size_t>(grid_.extents[1]) : std::size_t{1};
    // Axis 0: rows are n1 apart; sweep all columns together.
    if (n0 > 1) {
        const auto& t = factors(0, r);
        for (std::size_t j = 0; j < n1; ++j)
            u[j] *= t.inv[0];
        for (std::size_t i = 1; i < n0; ++i) {
            double* cur = u + i * n1;
            const double* prev = cur - n1;
            for (std::size_t j = 0; j < n1; ++j)
                cur[j] = (cur[j] + r * prev[j]) * t.inv[i];
        }
        for (std::size_t i = n0 - 1; i-- > 0;) {
            double* cur = u + i * n1;
            const double* next = cur + n1;
            for (std::size_t j = 0; j < n1; ++j)
                cur[j] -= t.cp[i] * next[j];
        }
    }
    if (grid_.dim == 2 && n1 > 1) {
        // Rows are independent recurrences; interleave a block of them so the
        // dependent chains overlap.
        const auto& t = factors(1, r);
        constexpr std::size_t B = 8;
        for (std::size_t i0 = 0; i0 < n0; i0 += B) {
            const std::size_t nb = std::min(B, n0 - i0);
            double* base = u + i0 * n1;
            for (std::size_t b = 0; b < nb; ++b)
                base[b * n1] *= t.inv[0];
            for (std::size_t j = 1; j < n1; ++j) {
                const double inv = t.inv[j];
                for (std::size_t b = 0; b < nb; ++b) {
                    double* row = base + b * n1;
                    row[j] = (row[j] + r * row[j - 1]) * inv;
                }
            }
            for (std::size_t j = n1 - 1; j-- > 0;) {
                const double cp = t.cp[j];
                for (std::size_t b = 0; b < nb; ++b) {
                    double* row = base + b * n1;
                    row[j] -= cp * row[j + 1];
                }
            }
        }
    }
}

void Stepper::explicit_step(Field& field, double dt, const Forcing* forcing)
{
    const double r = dt / (grid_.h * grid_.h);
    const double* u = field.u.data();
    double* out = scratch_.data();
    const auto n0 = static_cast<std::size_t>(grid_.extents[0]);
    const auto n1 = grid_.dim == 2 ? static_cast<std::size_t>(grid_.extents[1]) : std::size_t{1};
    // Diffusion: out = u + r * lap u, neighbour pairs summed per axis so the
    // update is exactly reflection symmetric.
    if (grid_.dim == 1) {
        if (n0 == 1) {
            out[0] = u[0];
        } else {
            out[0] = u[0] + r * (u[1] - u[0]);
            for (std::size_t i = 1; i + 1 < n0; ++i)
                out[i] = u[i] + r * ((u[i - 1] + u[i + 1]) - 2 * u[i]);
            out[n0 - 1] = u[n0 - 1] + r * (u[n0 - 2] - u[n0 - 1]);
        }
    } else {
        for (std::size_t i = 0; i < n0; ++i) {
            const double* row = u + i * n1;
            const double* up = i > 0 ? row - n1 : row;
            const double* down = i + 1 < n0 ? row + n1 : row;
            double* o = out + i * n1;
            for (std::size_t j = 0; j < n1; ++j) {
                const double v = row[j];
                const double s = j > 0 ? row[j - 1] : v;
                const double n = j + 1 < n1 ? row[j + 1] : v;
                o[j] = v + r * (((up[j] + down[j]) - 2 * v) + ((s + n) - 2 * v));
            }
        }
    }
    if (cfg_.reaction) {
        const std::size_t total = grid_.size();
        if (f_->kind() == BistableReaction::Kind::Cubic) {
            const double theta = f_->theta();
            for (std::size_t c = 0; c < total; ++c) {
                const double v = u[c];
                out[c] += dt * (v * (1 - v) * (v - theta));
            }
        } else {
            for (std::size_t c = 0; c < total; ++c)
                out[c] += dt * f_->value_extended(u[c]);
        }
    }
    if (forcing)
        for (std::size_t c = 0; c < scratch_.size(); ++c)
            out[c] += dt * (*forcing)(grid_.center(c), field.t);
    field.u.swap(scratch_);
}

void Stepper::reaction_step(Field& field, double dt, const Forcing* forcing)
{
    if (cfg_.reaction) {
        if (f_->kind() == BistableReaction::Kind::Cubic) {
            const double theta = f_->theta();
            for (double& v : field.u)
                v += dt * (v * (1 - v) * (v - theta));
        } else {
            for (double& v : field.u)
                v += dt * f_->value_extended(v);
        }
    }
    if (forcing)
        for (std::size_t i = 0; i < field.u.size(); ++i)
            field.u[i] += dt * (*forcing)(grid_.center(i), field.t);
}

void Stepper::step(Field& field, double dt_override, const Forcing* forcing)
{
    if (field.grid.size() != grid_.size())
        throw ConfigError("rdsolver: field does not match the stepper grid");
    const double dt = (dt_override > 0 && dt_override < dt_) ? dt_override : dt_;
    if (cfg_.scheme == Scheme::Explicit) {
        explicit_step(field, dt, forcing);
    } else {
        implicit_diffusion(field, dt);
        reaction_step(field, dt, forcing);
    }
    field.t += dt;
    check_range(field);
}

void step(Field& field, const BistableReaction& f, const SolverConfig& cfg)
{
    Stepper s(field.grid, f, cfg);
    s.step(field);
}

double front_radius(const Field& field, double level, const Point& center)
{
    if (field.sup() < level)
        return 0.0;
    const Grid& g = field.grid;
    std::array<std::int64_t, kMaxDim> ic{0, 0, 0};
    for (int k = 0; k < g.dim; ++k) {
        const auto idx = static_cast<std::int64_t>(std::floor(center[k] / g.h)) - g.first[k];
        ic[k] = std::clamp<std::int64_t>(idx, 0, g.extents[k] - 1);
    }
    double best = 0.0;
    for (int k = 0; k < g.dim; ++k) {
        const std::int64_t n = g.extents[k];
        auto value = [&](std::int64_t m) {
            auto idx = ic;
            idx[k] = m;
            return field.u[g.flatten(idx)];
        };
        // Positive direction: outermost cell at or above the level.
        for (std::int64_t m = n - 1; m >= ic[k]; --m) {
            const double v = value(m);
            if (v < level)
                continue;
            double x = g.cell_center(k, m);
            if (m + 1 < n) {
                const double w = value(m + 1);
                x += g.h * (v - level) / (v - w);
            }
            best = std::max(best, std::abs(x - center[k]));
            break;
        }
        for (std::int64_t m = 0; m <= ic[k]; ++m) {
            const double v = value(m);
            if (v < level)
                continue;
            double x = g.cell_center(k, m);
            if (m > 0) {
                const double w = value(m - 1);
                x -= g.h * (v - level) / (v - w);
            }
            best = std::max(best, std::abs(x - center[k]));
            break;
        }
    }
    return best;
}

nlohmann::json Outcome::to_json(bool with_history) const
{
    nlohmann::json j{{"verdict", verdict_name(verdict)},
                     {"certificate_time", certificate_time},
                     {"shortcut", shortcut},
                     {"initial_measure", initial_measure},
                     {"center", center},
                     {"steps", steps},
                     {"dt", dt}};
    if (!times.empty()) {
        j["final_sup"] = sup_history.back();
        j["final_front_radius"] = radius_history.back();
    }
    if (with_history) {
        j["history"] = {{"t", times}, {"sup", sup_history}, {"front_radius", radius_history},
                        {"core_min", core_history}};
    }
    if (!diagnostics.is_null())
        j["diagnostics"] = diagnostics;
    return j;
}

Outcome classify(const SetExpr& set, double amplitude, const BistableReaction& f, const SolverConfig& cfg)
{
    check_pde_dim(set.dim());
    check_amplitude(amplitude);
    cfg.validate(f, set.dim());
    const double lambda = geom::measure(set).value;
    nlohmann::json manifest{{"reaction", f.to_json()}, {"solver", cfg.to_json()}, {"set", set.to_json()},
                            {"amplitude", amplitude}};
    if (cfg.small_mass_shortcut && cfg.reaction && lambda <= small_mass_epsilon(f, set.dim())) {
        Outcome o;
        o.verdict = Verdict::Extinction;
        o.shortcut = true;
        o.initial_measure = lambda;
        o.trajectory.manifest = manifest;
        o.diagnostics = {{"epsilon", small_mass_epsilon(f, set.dim())}};
        return o;
    }
    Field u0 = init_field(set, amplitude, f, cfg);
    Outcome o = classify(std::move(u0), f, cfg, lambda);
    manifest["verdict"] = verdict_name(o.verdict);
    manifest["certificate_time"] = o.certificate_time;
    manifest["front_radius_history"] = o.radius_history;
    o.trajectory.manifest = manifest;
    return o;
}

Outcome classify(Field u0, const BistableReaction& f, const SolverConfig& cfg, double initial_measure)
{
    const Grid& g = u0.grid;
    Stepper stepper(g, f, cfg);
    check_range(u0);
    Outcome o;
    o.dt = stepper.dt();
    o.initial_measure = initial_measure >= 0 ? initial_measure : u0.mass();
    o.center = u0.center_of_mass();

    const double margin = boundary_margin_of(cfg, &f);
    const auto margin_cells = static_cast<std::int64_t>(std::ceil(margin / g.h - 1e-9));
    std::vector<std::size_t> core, wall;
    std::size_t nearest = 0;
    double nearest_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto idx = g.unflatten(i);
        const double d = distance(g.center(i), o.center, g.dim);
        if (d <= cfg.invasion_radius)
            core.push_back(i);
        if (d < nearest_d) {
            nearest_d = d;
            nearest = i;
        }
        for (int k = 0; k < g.dim; ++k)
            if (idx[k] < margin_cells || idx[k] >= g.extents[k] - margin_cells) {
                wall.push_back(i);
                break;
            }
    }
    if (core.empty())
        core.push_back(nearest);

    const double extinction_level = f.theta() * (1 - cfg.extinction_margin);
    bool decided = false;
    int streak = 0, best_streak = 0;
    double best_core = 0.0, min_sup = std::numeric_limits<double>::infinity();

    auto record = [&](const Field& u) {
        const double sup = u.sup();
        double core_min = std::numeric_limits<double>::infinity();
        for (std::size_t i : core)
            core_min = std::min(core_min, u.u[i]);
        const double radius = front_radius(u, cfg.front_level, o.center);
        for (std::size_t i : wall)
            if (u.u[i] >= cfg.front_level)
                throw DomainTooSmall("rdsolver: solution reached the truncation margin at t = " + fmt17(u.t));
        if (!o.radius_history.empty() && radius > o.radius_history.back())
            ++streak;
        else
            streak = 0;
        best_streak = std::max(best_streak, streak);
        best_core = std::max(best_core, core_min);
        min_sup = std::min(min_sup, sup);
        o.times.push_back(u.t);
        o.sup_history.push_back(sup);
        o.radius_history.push_back(radius);
        o.core_history.push_back(core_min);
        if (decided)
            return;
        if (cfg.reaction && sup <= extinction_level) {
            o.verdict = Verdict::Extinction;
            o.certificate_time = u.t;
            decided = true;
        } else if (cfg.reaction && core_min >= cfg.invasion_level && streak >= cfg.window) {
            o.verdict = Verdict::Invasion;
            o.certificate_time = u.t;
            decided = true;
        }
    };

    std::size_t next_snap = 0;
    auto snap = [&](const Field& u) {
        while (next_snap < cfg.snapshot_times.size() &&
               std::abs(cfg.snapshot_times[next_snap] - u.t) <= 1e-9 * std::max(1.0, u.t)) {
            o.trajectory.snapshots.push_back({u.t, u});
            ++next_snap;
        }
    };

    Field u = std::move(u0);
    snap(u);
    record(u);
    double next_check = cfg.check_interval;
    const double dt = stepper.dt();
    while (!(decided && cfg.stop_at_certificate) && u.t < cfg.T_max - 1e-12) {
        double target = std::min(cfg.T_max, next_check);
        if (next_snap < cfg.snapshot_times.size())
            target = std::min(target, cfg.snapshot_times[next_snap]);
        double h = dt;
        if (u.t + dt > target - 1e-9 * dt)
            h = target - u.t;
        const double t_before = u.t;
        stepper.step(u, h);
        if (h != dt)
            u.t = target; // land exactly on the event time
        else
            u.t = t_before + dt;
        ++o.steps;
        snap(u);
        if (u.t >= next_check - 1e-12 || u.t >= cfg.T_max - 1e-12) {
            record(u);
            while (next_check <= u.t + 1e-12)
                next_check += cfg.check_interval;
        }
    }
    if (!decided) {
        o.verdict = Verdict::Undecided;
        o.certificate_time = u.t;
    }
    o.diagnostics = {{"min_sup", min_sup},
                     {"extinction_level", extinction_level},
                     {"max_core_min", best_core},
                     {"longest_growth_streak", best_streak}};
    return o;
}

double front_speed(const std::vector<double>& times, const std::vector<double>& radii, double discard)
{
    if (times.size() != radii.size())
        throw ConfigError("front_speed: history lengths differ");
    const auto start = static_cast<std::size_t>(std::floor(discard * static_cast<double>(times.size())));
    const std::size_t n = times.size() - std::min(start, times.size());
    if (n < 3)
        throw ConfigError("front_speed: too few points in the fit window");
    double mt = 0, mr = 0;
    for (std::size_t i = start; i < times.size(); ++i) {
        mt += times[i];
        mr += radii[i];
    }
    mt /= static_cast<double>(n);
    mr /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = start; i < times.size(); ++i) {
        sxy += (times[i] - mt) * (radii[i] - mr);
        sxx += (times[i] - mt) * (times[i] - mt);
    }
    return sxy / sxx;
}

double front_speed(const Outcome& run, double discard)
{
    return front_speed(run.times, run.radius_history, discard);
}

Comparison compare_runs(Field small, Field large, const BistableReaction& f, const SolverConfig& cfg, double T)
{
    if (small.grid.size() != large.grid.size() || !small.grid.compatible(large.grid) ||
        small.grid.first != large.grid.first)
        throw ConfigError("compare_runs: fields live on different grids");
    Stepper a(small.grid, f, cfg);
    Stepper b(large.grid, f, cfg);
    Comparison c;
    auto check = [&] {
        for (std::size_t i = 0; i < small.u.size(); ++i) {
            const double d = small.u[i] - large.u[i];
            c.max_violation = std::max(c.max_violation, d);
            if (d > 1e-10)
                c.ordered = false;
        }
        ++c.checks;
    };
    check();
    while (small.t < T - 1e-12) {
        const double h = std::min(a.dt(), T - small.t);
        a.step(small, h);
        b.step(large, h);
        check();
    }
    return c;
}

std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir, const std::string& stem,
                                                   const Trajectory& trajectory)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    if (trajectory.snapshots.empty())
        return out;
    const int dim = trajectory.snapshots.front().field.grid.dim;
    if (dim == 1) {
        const auto path = dir / (stem + ".csv");
        std::ofstream os(path);
        if (!os)
            throw ConfigError("cannot write " + path.string());
        os << "t,x,u\n";
        for (const auto& s : trajectory.snapshots) {
            const Grid& g = s.field.grid;
            for (std::size_t i = 0; i < g.size(); ++i)
                os << fmt17(s.t) << ',' << fmt17(g.cell_center(0, static_cast<std::int64_t>(i))) << ','
                   << fmt17(s.field.u[i]) << '\n';
        }
        out.push_back(path);
        return out;
    }
    const auto index = dir / (stem + "_index.csv");
    std::ofstream os(index);
    if (!os)
        throw ConfigError("cannot write " + index.string());
    os << "t,file\n";
    for (std::size_t k = 0; k < trajectory.snapshots.size(); ++k) {
        const auto& s = trajectory.snapshots[k];
        char name[64];
        std::snprintf(name, sizeof name, "_%04zu.bin", k);
        const auto path = dir / (stem + name);
        geom::RasterSet r;
        r.grid = s.field.grid;
        r.supersampling = 1;
        r.coverage = s.field.u;
        geom::write_raster(path, r);
        os << fmt17(s.t) << ',' << path.filename().string() << '\n';
        out.push_back(path);
    }
    out.push_back(index);
    return out;
}

} // namespace fragrd::rd
