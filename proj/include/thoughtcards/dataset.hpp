#pragma once

// JSON Lines datasets. One record per line:
//
//   {"id": "...", "question": "...", "image": "rel/path.png" | "image_base64": "...",
//    "answer": "...", "category": "...", "conditions": ["...", ...]}
//
// Only id and question are required. Relative image paths resolve against
// the dataset file's directory.

#include "thoughtcards/core.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace thoughtcards {

struct DatasetRecord {
    Query query;
    std::optional<std::string> category;
};

inline DatasetRecord record_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ParseError("dataset record is not an object");
    DatasetRecord r;
    auto& q = r.query;
    if (!j.contains("id") || !j["id"].is_string()) throw ParseError("dataset record lacks string 'id'");
    q.id = j["id"].get<std::string>();
    if (!j.contains("question") || !j["question"].is_string()) throw ParseError("record '" + q.id + "' lacks 'question'");
    q.text = j["question"].get<std::string>();
    if (j.contains("image") && !j["image"].is_null()) {
        std::filesystem::path p = j["image"].get<std::string>();
        q.image = ImageFile{p.is_absolute() ? p : base_dir / p};
    } else if (j.contains("image_base64") && !j["image_base64"].is_null()) {
        q.image = InlineImage{j["image_base64"].get<std::string>(), j.value("image_mime", std::string("image/png"))};
    }
    if (j.contains("answer") && !j["answer"].is_null()) {
        const auto& a = j["answer"];
        q.gold_answer = a.is_string() ? a.get<std::string>() : a.dump();
    }
    if (j.contains("category") && !j["category"].is_null()) r.category = j["category"].get<std::string>();
    if (j.contains("conditions") && !j["conditions"].is_null()) q.conditions = j["conditions"].get<std::vector<std::string>>();
    validate(q);
    return r;
}

inline nlohmann::json record_to_json(const DatasetRecord& r) {
    const Query& q = r.query;
    nlohmann::json j = {{"id", q.id}, {"question", q.text}};
    if (q.image) {
        if (const auto* f = std::get_if<ImageFile>(&*q.image)) {
            j["image"] = f->path.generic_string();
        } else {
            const auto& img = std::get<InlineImage>(*q.image);
            j["image_base64"] = img.base64;
            j["image_mime"] = img.mime_type;
        }
    }
    if (q.gold_answer) j["answer"] = *q.gold_answer;
    if (r.category) j["category"] = *r.category;
    if (!q.conditions.empty()) j["conditions"] = q.conditions;
    return j;
}

inline std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset '" + path.string() + "'");
    const auto base_dir = path.parent_path();
    std::vector<DatasetRecord> records;
    std::set<std::string> ids;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (detail::trim(line).empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line), base_dir));
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!ids.insert(records.back().query.id).second) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": duplicate id '" +
                             records.back().query.id + "'");
        }
    }
    return records;
}

inline void save_dataset(std::span<const DatasetRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write dataset '" + path.string() + "'");
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<Query> queries_of(std::span<const DatasetRecord> records) {
    std::vector<Query> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.query);
    return out;
}

}  // namespace thoughtcards
