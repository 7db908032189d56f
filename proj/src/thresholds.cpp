#include <fragrd/thresholds.hpp>

#include <fragrd/families.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace fragrd::thresholds {

namespace {

void check_range(double lo, double hi, double floor)
{
    if (!(lo < hi) || !(lo > floor))
        throw ConfigError("family range must satisfy floor < lo < hi");
}

} // namespace

MonotoneFamily ball_family(int dim, double amplitude, double lo, double hi)
{
    check_dim(dim);
    check_range(lo, hi, 0.0);
    MonotoneFamily f;
    f.name = "ball";
    f.lo = lo;
    f.hi = hi;
    f.generator = [dim, amplitude](double r) { return InitialData{SetExpr::ball(dim, Point{}, r), amplitude}; };
    f.params = {{"dim", dim}, {"amplitude", amplitude}};
    return f;
}

MonotoneFamily cube_family(int dim, double lo, double hi)
{
    check_dim(dim);
    check_range(lo, hi, 0.0);
    MonotoneFamily f;
    f.name = "cube";
    f.lo = lo;
    f.hi = hi;
    f.generator = [dim](double a) {
        families::FamilySpec s;
        s.tag = families::FamilyTag::Cube;
        s.dim = dim;
        s.a = a;
        return InitialData{families::build(s), 1.0};
    };
    f.params = {{"dim", dim}};
    return f;
}

MonotoneFamily cube_ball_family(int dim, double a, double lo, double hi)
{
    check_dim(dim);
    check_range(lo, hi, 0.0);
    MonotoneFamily f;
    f.name = "cube-ball";
    f.lo = lo;
    f.hi = hi;
    f.generator = [dim, a](double r) {
        families::FamilySpec s;
        s.tag = families::FamilyTag::CubeBall;
        s.dim = dim;
        s.a = a;
        s.r = r;
        return InitialData{families::build(s), 1.0};
    };
    f.params = {{"dim", dim}, {"a", a}};
    return f;
}

MonotoneFamily dilation_family(const SetExpr& set, const Point& center, double lo, double hi)
{
    check_range(lo, hi, 0.0);
    MonotoneFamily f;
    f.name = "dilation";
    f.lo = lo;
    f.hi = hi;
    Point neg{};
    for (int k = 0; k < kMaxDim; ++k)
        neg[k] = -center[k];
    const SetExpr base = set.translated(neg);
    f.generator = [base, center](double mu) { return InitialData{base.scaled(mu).translated(center), 1.0}; };
    f.params = {{"set", set.to_json()}, {"center", center}};
    return f;
}

MonotoneFamily amplitude_family(const SetExpr& set, double lo, double hi)
{
    check_range(lo, hi, 0.0);
    if (hi > 1.0)
        throw ConfigError("amplitude family: amplitudes must stay in (0,1]");
    MonotoneFamily f;
    f.name = "amplitude";
    f.lo = lo;
    f.hi = hi;
    f.generator = [set](double alpha) { return InitialData{set, alpha}; };
    f.params = {{"set", set.to_json()}};
    return f;
}

bool spot_check_monotone(const MonotoneFamily& family, int pairs, double h)
{
    for (int i = 0; i < pairs; ++i) {
        const double s0 = family.lo + (family.hi - family.lo) * i / pairs;
        const double s1 = family.lo + (family.hi - family.lo) * (i + 1) / pairs;
        const auto a = family.generator(s0);
        const auto b = family.generator(s1);
        const int dim = a.set.dim();
        geom::Bounds box = b.set.bounding_box();
        const auto ba = a.set.bounding_box();
        for (int k = 0; k < dim; ++k) {
            box.lo[k] = std::min(box.lo[k], ba.lo[k]);
            box.hi[k] = std::max(box.hi[k], ba.hi[k]);
        }
        double hh = h;
        if (hh <= 0) {
            double ext = 0.0;
            for (int k = 0; k < dim; ++k)
                ext = std::max(ext, box.extent(k));
            hh = ext / (dim == 1 ? 1024 : 128);
        }
        const auto grid = geom::Grid::covering(box, hh, dim);
        const auto ra = geom::rasterize_on(a.set, grid, 4);
        const auto rb = geom::rasterize_on(b.set, grid, 4);
        for (std::size_t c = 0; c < grid.size(); ++c)
            if (a.amplitude * ra.coverage[c] > b.amplitude * rb.coverage[c] + 1e-12)
                return false;
    }
    return true;
}

nlohmann::json Probe::to_json() const
{
    nlohmann::json j{{"sigma", sigma}, {"verdict", rd::verdict_name(verdict)}, {"certificate_time", certificate_time}};
    if (!error.empty())
        j["error"] = error;
    return j;
}

Classifier make_classifier(const BistableReaction& f, const rd::SolverConfig& cfg)
{
    return [f, cfg](const InitialData& d) { return rd::classify(d.set, d.amplitude, f, cfg); };
}

nlohmann::json ThresholdBracket::to_json() const
{
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : log)
        probes.push_back(p.to_json());
    return {{"lo", lo},         {"hi", hi},       {"tolerance", tolerance}, {"undecided", undecided},
            {"stalled", stalled}, {"probes", probes}, {"speculative", speculative}};
}

void parallel_for(int n, int workers, const std::function<void(int)>& job)
{
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i)
            job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    for (int w = 0; w < count; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

namespace {

Probe run_probe(const MonotoneFamily& family, const Classifier& classify, double sigma)
{
    Probe p;
    p.sigma = sigma;
    try {
        const auto o = classify(family.generator(sigma));
        p.verdict = o.verdict;
        p.certificate_time = o.certificate_time;
    } catch (const Error& e) {
        p.verdict = Verdict::Undecided;
        p.error = e.what();
    }
    return p;
}

class ProbeCache {
public:
    ProbeCache(const MonotoneFamily& family, const Classifier& classify, int workers)
        : family_(family), classify_(classify), workers_(workers)
    {
    }

    void prefetch(std::vector<double> sigmas)
    {
        std::erase_if(sigmas, [&](double s) { return memo_.count(s) > 0; });
        std::vector<Probe> out(sigmas.size());
        parallel_for(static_cast<int>(sigmas.size()), workers_,
                     [&](int i) { out[i] = run_probe(family_, classify_, sigmas[i]); });
        for (const auto& p : out)
            memo_.emplace(p.sigma, p);
    }

    const Probe& consult(double sigma, std::vector<Probe>& log)
    {
        prefetch({sigma});
        const Probe& p = memo_.at(sigma);
        log.push_back(p);
        return p;
    }

    std::size_t size() const { return memo_.size(); }

private:
    const MonotoneFamily& family_;
    const Classifier& classify_;
    int workers_;
    std::map<double, Probe> memo_;
};

} // namespace

ThresholdBracket bisect(const MonotoneFamily& family, const Classifier& classify, const BisectOptions& opt)
{
    if (!(opt.tol > 0))
        throw ConfigError("bisect: tol must be positive");
    if (!family.generator)
        throw ConfigError("bisect: family has no generator");
    if (opt.check_monotone && !spot_check_monotone(family))
        throw ConfigError("bisect: family '" + family.name + "' is not monotone on its range");

    ThresholdBracket b;
    ProbeCache cache(family, classify, opt.workers);
    double lo = family.lo, hi = family.hi;
    const double width0 = hi - lo;

    int widen = 0;
    while (true) {
        const Probe& p = cache.consult(lo, b.log);
        if (p.verdict == Verdict::Extinction)
            break;
        if (p.verdict == Verdict::Invasion)
            hi = lo;
        if (++widen > opt.max_widen)
            throw ThresholdError("bisect: lower endpoint never reached Extinction after widening");
        double cand = lo - width0 * std::ldexp(1.0, widen - 1);
        if (cand <= family.floor)
            cand = family.floor + 0.5 * (lo - family.floor);
        lo = cand;
    }
    widen = 0;
    while (true) {
        const Probe& p = cache.consult(hi, b.log);
        if (p.verdict == Verdict::Invasion)
            break;
        if (p.verdict == Verdict::Extinction)
            lo = std::max(lo, hi);
        if (++widen > opt.max_widen)
            throw ThresholdError("bisect: upper endpoint never reached Invasion after widening");
        hi += width0 * std::ldexp(1.0, widen - 1);
    }

    std::vector<double> undecided;
    int interior = 0, interior_certified = 0;
    while (hi - lo > opt.tol) {
        if (static_cast<int>(b.log.size()) >= opt.max_probes) {
            b.stalled = true;
            break;
        }
        std::erase_if(undecided, [&](double u) { return !(u > lo && u < hi); });
        double sigma;
        if (undecided.empty()) {
            sigma = 0.5 * (lo + hi);
            if (opt.workers > 1)
                cache.prefetch({sigma, 0.5 * (lo + sigma), 0.5 * (sigma + hi)});
        } else {
            const auto [umin, umax] = std::minmax_element(undecided.begin(), undecided.end());
            const double gap_lo = *umin - lo, gap_hi = hi - *umax;
            if (std::max(gap_lo, gap_hi) <= 0.5 * opt.tol) {
                b.stalled = true;
                break;
            }
            sigma = gap_lo >= gap_hi ? 0.5 * (lo + *umin) : 0.5 * (*umax + hi);
        }
        const Probe& p = cache.consult(sigma, b.log);
        ++interior;
        if (p.verdict == Verdict::Extinction) {
            lo = sigma;
            ++interior_certified;
        } else if (p.verdict == Verdict::Invasion) {
            hi = sigma;
            ++interior_certified;
        } else {
            undecided.push_back(sigma);
        }
    }
    if (b.stalled && interior > 0 && interior_certified == 0)
        throw ThresholdError("bisect: all interior probes were Undecided");
    std::erase_if(undecided, [&](double u) { return !(u > lo && u < hi); });
    std::sort(undecided.begin(), undecided.end());
    b.lo = lo;
    b.hi = hi;
    b.undecided = undecided;
    b.tolerance = hi - lo;
    b.speculative = static_cast<int>(cache.size()) - static_cast<int>(b.log.size());
    if (b.speculative < 0)
        b.speculative = 0;
    return b;
}

ThresholdBracket r_star(int dim, double epsilon, double a_star, const Classifier& classify, const BisectOptions& opt)
{
    if (!(epsilon > 0) || !(a_star > 0))
        throw ConfigError("r_star: epsilon and a* must be positive");
    const double a = a_star + epsilon;
    const auto family = cube_ball_family(dim, a, 0.25 * a, 0.5 * a * std::sqrt(static_cast<double>(dim)));
    return bisect(family, classify, opt);
}

nlohmann::json SweepRow::to_json() const
{
    nlohmann::json j{{"sigma", sigma}, {"verdict", rd::verdict_name(verdict)}, {"certificate_time", certificate_time}};
    if (!error.empty())
        j["error"] = error;
    if (!extra.is_null())
        j["extra"] = extra;
    return j;
}

std::vector<SweepRow> sweep(std::vector<double> sigmas, const std::function<InitialData(double)>& generator,
                            const Classifier& classify, int workers)
{
    std::sort(sigmas.begin(), sigmas.end());
    std::vector<SweepRow> rows(sigmas.size());
    parallel_for(static_cast<int>(sigmas.size()), workers, [&](int i) {
        SweepRow& r = rows[i];
        r.sigma = sigmas[i];
        try {
            const auto o = classify(generator(r.sigma));
            r.verdict = o.verdict;
            r.certificate_time = o.certificate_time;
            r.extra = {{"shortcut", o.shortcut}, {"initial_measure", o.initial_measure}};
        } catch (const Error& e) {
            r.verdict = Verdict::Undecided;
            r.error = e.what();
        }
    });
    return rows;
}

bool verdicts_monotone(const std::vector<SweepRow>& rows)
{
    bool seen_invasion = false;
    for (const auto& r : rows) {
        if (r.verdict == Verdict::Invasion)
            seen_invasion = true;
        else if (r.verdict == Verdict::Extinction && seen_invasion)
            return false;
    }
    return true;
}

} // namespace fragrd::thresholds
