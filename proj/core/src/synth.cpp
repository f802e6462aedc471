#include "edgepupil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edgepupil/error.hpp"
#include "edgepupil/image_io.hpp"

namespace fs = std::filesystem;

namespace edgepupil {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal()
    {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// Vertical half-extent of a rotated ellipse.
double half_height(const SynthEllipse& e)
{
    const double s = std::sin(e.theta);
    const double c = std::cos(e.theta);
    return std::sqrt(e.a * e.a * s * s + e.b * e.b * c * c);
}

double half_width(const SynthEllipse& e)
{
    const double s = std::sin(e.theta);
    const double c = std::cos(e.theta);
    return std::sqrt(e.a * e.a * c * c + e.b * e.b * s * s);
}

// Fraction of a unit disc with y <= t, t in [-1, 1].
double disc_fraction_below(double t)
{
    t = std::clamp(t, -1.0, 1.0);
    return (t * std::sqrt(1.0 - t * t) + std::asin(t) + std::numbers::pi / 2.0) / std::numbers::pi;
}

}  // namespace

void SynthScene::validate() const
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("synth: resolution must be positive");
    if (!(pupil.a > 0.0 && pupil.b > 0.0))
        throw InvalidArgument("synth: pupil semi-axes must be positive");
    if (!(pupil_intensity < iris_intensity && iris_intensity < sclera_intensity))
        throw InvalidArgument("synth: intensities must satisfy pupil < iris < sclera");
    if (!(noise_sigma >= 0.0))
        throw InvalidArgument("synth: noise_sigma must be >= 0");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction <= 1.0))
        throw InvalidArgument("synth: occlusion_fraction must lie in [0, 1]");
    if (iris_radius < 0.0)
        throw InvalidArgument("synth: iris_radius must be >= 0");
    const double hw = half_width(pupil);
    const double hh = half_height(pupil);
    if (pupil.cx + hw < 0.0 || pupil.cx - hw > width - 1 || pupil.cy + hh < 0.0 || pupil.cy - hh > height - 1)
        throw InvalidArgument("synth: pupil lies entirely outside the frame");
}

std::optional<double> eyelid_cut(const SynthScene& scene)
{
    if (scene.occlusion_fraction <= 0.0)
        return std::nullopt;
    // Fully closed: the band reaches past the lowest pupil row.
    if (scene.occlusion_fraction >= 1.0)
        return scene.pupil.cy + half_height(scene.pupil) + 1.0;
    // Affine maps keep area ratios, so the covered share of the ellipse equals
    // the covered share of a unit disc cut at the same relative height.
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (disc_fraction_below(mid) < scene.occlusion_fraction)
            lo = mid;
        else
            hi = mid;
    }
    return scene.pupil.cy + hi * half_height(scene.pupil);
}

RenderedFrame render(const SynthScene& scene)
{
    scene.validate();
    const SynthEllipse& p = scene.pupil;
    const double iris_r = scene.iris_radius > 0.0 ? scene.iris_radius : 2.5 * std::max(p.a, p.b);
    const double ct = std::cos(p.theta);
    const double st = std::sin(p.theta);
    const auto cut = eyelid_cut(scene);

    GrayImage img(scene.width, scene.height, scene.sclera_intensity);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            const double dx = x - p.cx;
            const double dy = y - p.cy;
            std::uint8_t v = scene.sclera_intensity;
            if (dx * dx + dy * dy <= iris_r * iris_r)
                v = scene.iris_intensity;
            const double u = dx * ct + dy * st;
            const double w = -dx * st + dy * ct;
            if ((u * u) / (p.a * p.a) + (w * w) / (p.b * p.b) <= 1.0)
                v = scene.pupil_intensity;
            if (scene.reflection) {
                const auto& r = *scene.reflection;
                if ((x - r.x) * (x - r.x) + (y - r.y) * (y - r.y) <= r.r * r.r)
                    v = r.intensity;
            }
            if (cut && y <= *cut)
                v = scene.sclera_intensity;
            img(x, y) = v;
        }
    }

    if (scene.noise_sigma > 0.0) {
        Rng rng(scene.seed);
        for (auto& px : img.pixels()) {
            const double noisy = px + scene.noise_sigma * rng.normal();
            px = static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
        }
    }
    return {std::move(img), {p.cx, p.cy}};
}

void SessionSpec::validate() const
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("session: resolution must be positive");
    if (count == 0)
        throw InvalidArgument("session: count must be >= 1");
    if (!(pupil_area_min > 0.0 && pupil_area_min <= pupil_area_max))
        throw InvalidArgument("session: need 0 < pupil_area_min <= pupil_area_max");
    if (!(axis_ratio_min > 0.0 && axis_ratio_min <= axis_ratio_max && axis_ratio_max <= 1.0))
        throw InvalidArgument("session: need 0 < axis_ratio_min <= axis_ratio_max <= 1");
    if (!(center_margin >= 0.0 && 2.0 * center_margin < std::min(width, height)))
        throw InvalidArgument("session: center_margin leaves no room for the pupil centre");
    if (!(iris_scale >= 1.0))
        throw InvalidArgument("session: iris_scale must be >= 1");
    if (!(pupil_intensity < iris_intensity && iris_intensity < sclera_intensity))
        throw InvalidArgument("session: intensities must satisfy pupil < iris < sclera");
    if (!(noise_sigma >= 0.0))
        throw InvalidArgument("session: noise_sigma must be >= 0");
    auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!prob(reflection_probability) || !prob(closed_eye_probability))
        throw InvalidArgument("session: probabilities must lie in [0, 1]");
    if (!(prob(occlusion_min) && prob(occlusion_max) && occlusion_min <= occlusion_max))
        throw InvalidArgument("session: need 0 <= occlusion_min <= occlusion_max <= 1");
    if (!(reflection_radius > 0.0))
        throw InvalidArgument("session: reflection_radius must be positive");
}

SynthScene session_scene(const SessionSpec& spec, std::size_t index, bool* closed_eye)
{
    // Every frame gets its own stream so a scene does not depend on the
    // frames drawn before it.
    Rng rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    for (int i = 0; i < 4; ++i)
        (void)rng.next();

    SynthScene s;
    s.width = spec.width;
    s.height = spec.height;
    s.pupil_intensity = spec.pupil_intensity;
    s.iris_intensity = spec.iris_intensity;
    s.sclera_intensity = spec.sclera_intensity;
    s.noise_sigma = spec.noise_sigma;

    const double area = rng.uniform(spec.pupil_area_min, spec.pupil_area_max);
    const double ratio = rng.uniform(spec.axis_ratio_min, spec.axis_ratio_max);
    const double a = std::sqrt(area / (std::numbers::pi * ratio));
    s.pupil.a = a;
    s.pupil.b = a * ratio;
    s.pupil.theta = rng.uniform(0.0, std::numbers::pi);
    s.pupil.cx = rng.uniform(spec.center_margin, spec.width - 1 - spec.center_margin);
    s.pupil.cy = rng.uniform(spec.center_margin, spec.height - 1 - spec.center_margin);
    s.iris_radius = spec.iris_scale * a;
    s.occlusion_fraction = rng.uniform(spec.occlusion_min, spec.occlusion_max);

    const bool reflect = rng.uniform() < spec.reflection_probability;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (reflect) {
        // Glint on the iris, clear of the pupil boundary.
        const double dist = 0.5 * (a + s.iris_radius);
        s.reflection = SynthReflection{s.pupil.cx + dist * std::cos(angle), s.pupil.cy + dist * std::sin(angle),
                                       spec.reflection_radius, 255};
    }
    const bool closed = rng.uniform() < spec.closed_eye_probability;
    if (closed)
        s.occlusion_fraction = 1.0;
    if (closed_eye)
        *closed_eye = closed;
    s.seed = rng.next();
    return s;
}

namespace {

template <typename T>
void read_key(const nlohmann::json& doc, const char* key, T& out)
{
    if (!doc.contains(key))
        return;
    const auto& v = doc[key];
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer())
            throw ConfigError(std::string("session spec: \"") + key + "\" must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (v.get<long long>() < 0)
                throw ConfigError(std::string("session spec: \"") + key + "\" must be non-negative");
        }
    } else if (!v.is_number()) {
        throw ConfigError(std::string("session spec: \"") + key + "\" must be a number");
    }
    out = v.get<T>();
}

}  // namespace

SessionSpec session_spec_from_json(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("session spec: invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("session spec: top-level value must be an object");
    static const std::set<std::string> keys{
        "width",          "height",           "count",           "seed",           "pupil_area_min",
        "pupil_area_max", "axis_ratio_min",   "axis_ratio_max",  "center_margin",  "iris_scale",
        "pupil_intensity", "iris_intensity",  "sclera_intensity", "noise_sigma",   "reflection_probability",
        "reflection_radius", "occlusion_min", "occlusion_max",   "closed_eye_probability"};
    for (const auto& [k, _] : doc.items())
        if (!keys.contains(k))
            throw ConfigError("session spec: unknown key \"" + k + "\"");

    SessionSpec s;
    read_key(doc, "width", s.width);
    read_key(doc, "height", s.height);
    read_key(doc, "count", s.count);
    read_key(doc, "seed", s.seed);
    read_key(doc, "pupil_area_min", s.pupil_area_min);
    read_key(doc, "pupil_area_max", s.pupil_area_max);
    read_key(doc, "axis_ratio_min", s.axis_ratio_min);
    read_key(doc, "axis_ratio_max", s.axis_ratio_max);
    read_key(doc, "center_margin", s.center_margin);
    read_key(doc, "iris_scale", s.iris_scale);
    int pi = s.pupil_intensity, ii = s.iris_intensity, si = s.sclera_intensity;
    read_key(doc, "pupil_intensity", pi);
    read_key(doc, "iris_intensity", ii);
    read_key(doc, "sclera_intensity", si);
    for (int v : {pi, ii, si})
        if (v < 0 || v > 255)
            throw ConfigError("session spec: intensities must lie in [0, 255]");
    s.pupil_intensity = static_cast<std::uint8_t>(pi);
    s.iris_intensity = static_cast<std::uint8_t>(ii);
    s.sclera_intensity = static_cast<std::uint8_t>(si);
    read_key(doc, "noise_sigma", s.noise_sigma);
    read_key(doc, "reflection_probability", s.reflection_probability);
    read_key(doc, "reflection_radius", s.reflection_radius);
    read_key(doc, "occlusion_min", s.occlusion_min);
    read_key(doc, "occlusion_max", s.occlusion_max);
    read_key(doc, "closed_eye_probability", s.closed_eye_probability);
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

SessionSpec load_session_spec(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(path.string() + ": cannot open session spec");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return session_spec_from_json(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

AnnotatedSet make_session(const SessionSpec& spec, const fs::path& out_dir)
{
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError(out_dir.string() + ": cannot create directory");

    const fs::path labels_path = out_dir / "labels.csv";
    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels)
        throw IoError(labels_path.string() + ": cannot open for writing");
    labels << "frame,x,y\n";

    AnnotatedSet set;
    set.resolution = {spec.width, spec.height};
    for (std::size_t i = 0; i < spec.count; ++i) {
        bool closed = false;
        const SynthScene scene = session_scene(spec, i, &closed);
        const RenderedFrame frame = render(scene);
        const std::string name = fmt::format("{:05d}.pgm", i);
        write_pgm(out_dir / name, frame.image);
        if (closed) {
            labels << name << ",,\n";
            set.unlabeled.push_back(out_dir / name);
        } else {
            labels << fmt::format("{},{},{}\n", name, frame.truth.x, frame.truth.y);
            set.frames.push_back(out_dir / name);
            set.truth.push_back(frame.truth);
        }
    }
    labels.flush();
    if (!labels)
        throw IoError(labels_path.string() + ": write failed");
    return set;
}

}  // namespace edgepupil
