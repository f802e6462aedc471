#include "edgepupil/params_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "edgepupil/error.hpp"

namespace edgepupil {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, std::string_view where)
{
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key))
            throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
T field(const json& obj, const char* key)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError(std::string("missing required key \"") + key + "\"");
    if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer())
            throw ConfigError(std::string("key \"") + key + "\" must be an integer");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("key \"") + key + "\" has the wrong type");
    }
}

template <typename T>
void optional_field(const json& obj, const char* key, T& out)
{
    if (obj.contains(key))
        out = field<T>(obj, key);
}

}  // namespace

DetectionParams params_from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("params: invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("params: top-level value must be an object");
    reject_unknown(doc,
                   {"t_canny", "k_blur", "min_pupil_area", "max_pupil_area", "t_circularity", "roi", "morph_enabled",
                    "morph_se", "morph_placement"},
                   "params");

    DetectionParams p;
    p.t_canny = field<double>(doc, "t_canny");
    p.k_blur = field<int>(doc, "k_blur");
    p.min_pupil_area = field<double>(doc, "min_pupil_area");
    p.max_pupil_area = field<double>(doc, "max_pupil_area");
    optional_field(doc, "t_circularity", p.t_circularity);
    optional_field(doc, "morph_enabled", p.morph_enabled);

    if (doc.contains("roi") && !doc["roi"].is_null()) {
        const json& r = doc["roi"];
        if (!r.is_object())
            throw ConfigError("params: roi must be an object or null");
        reject_unknown(r, {"x", "y", "w", "h"}, "params.roi");
        p.roi = RoiRect{field<int>(r, "x"), field<int>(r, "y"), field<int>(r, "w"), field<int>(r, "h")};
    }
    if (doc.contains("morph_se")) {
        const json& se = doc["morph_se"];
        if (!se.is_object())
            throw ConfigError("params: morph_se must be an object");
        reject_unknown(se, {"shape", "radius"}, "params.morph_se");
        const auto shape = field<std::string>(se, "shape");
        if (shape == "cross")
            p.morph_se.shape = SeShape::cross;
        else if (shape == "square")
            p.morph_se.shape = SeShape::square;
        else
            throw ConfigError("params: morph_se.shape must be \"cross\" or \"square\"");
        p.morph_se.radius = field<int>(se, "radius");
    }
    if (doc.contains("morph_placement")) {
        const auto placement = field<std::string>(doc, "morph_placement");
        if (placement == "pre_edge")
            p.morph_placement = MorphPlacement::pre_edge;
        else if (placement == "post_edge")
            p.morph_placement = MorphPlacement::post_edge;
        else
            throw ConfigError("params: morph_placement must be \"pre_edge\" or \"post_edge\"");
    }
    p.validate();
    return p;
}

std::string params_to_json(const DetectionParams& p)
{
    json doc = json::object();
    doc["t_canny"] = p.t_canny;
    doc["k_blur"] = p.k_blur;
    doc["min_pupil_area"] = p.min_pupil_area;
    doc["max_pupil_area"] = p.max_pupil_area;
    doc["t_circularity"] = p.t_circularity;
    doc["roi"] = p.roi ? json{{"x", p.roi->x}, {"y", p.roi->y}, {"w", p.roi->w}, {"h", p.roi->h}} : json(nullptr);
    doc["morph_enabled"] = p.morph_enabled;
    doc["morph_se"] = {{"shape", p.morph_se.shape == SeShape::cross ? "cross" : "square"},
                       {"radius", p.morph_se.radius}};
    doc["morph_placement"] = p.morph_placement == MorphPlacement::pre_edge ? "pre_edge" : "post_edge";
    return doc.dump(2) + "\n";
}

DetectionParams load_params(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(path.string() + ": cannot open params file");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return params_from_json(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_params(const std::filesystem::path& path, const DetectionParams& params)
{
    std::ofstream out(path);
    if (!out)
        throw IoError(path.string() + ": cannot open for writing");
    out << params_to_json(params);
}

}  // namespace edgepupil
