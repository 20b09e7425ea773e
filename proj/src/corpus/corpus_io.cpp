#include "propnet/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "propnet/error.hpp"

namespace propnet {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename F>
void for_each_line(std::string_view content, const std::string& origin, F&& f) {
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw InputError(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

TweetRecord raw_record(const json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  TweetRecord r = make_record(required_string(j, "id"), parse_org(required_string(j, "org")),
                              parse_timestamp(required_string(j, "timestamp")), required_string(j, "text"),
                              optional_string(j, "image"));
  if (auto it = j.find("english"); it != j.end()) {
    if (!it->is_boolean()) throw InputError("field 'english' must be a boolean");
    r.english = it->get<bool>();
  }
  return r;
}

}  // namespace

std::vector<TweetRecord> parse_raw_jsonl(std::string_view content, const std::string& origin) {
  std::vector<TweetRecord> out;
  for_each_line(content, origin, [&](const json& j) { out.push_back(raw_record(j)); });
  return out;
}

std::vector<TweetRecord> read_raw_jsonl(const std::filesystem::path& path) {
  return parse_raw_jsonl(read_file(path), path.string());
}

void write_corpus_jsonl(const std::filesystem::path& path, std::span<const TweetRecord> records,
                        std::optional<VariantKind> variant) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["org"] = to_string(r.org);
    j["timestamp"] = format_timestamp(r.timestamp);
    j["text"] = r.raw_text;
    j["image"] = r.image_ref ? json(*r.image_ref) : json(nullptr);
    j["english"] = r.english;
    j["std_text"] = r.std_text;
    j["image_hash"] = r.image_hash ? json(hash_to_hex(*r.image_hash)) : json(nullptr);
    j["label"] = static_cast<int>(r.label);
    j["split"] = r.split ? json(to_string(*r.split)) : json(nullptr);
    j["subset"] = r.subset ? json(to_string(*r.subset)) : json(nullptr);
    if (variant) {
      j["variant"] = to_string(*variant);
      j["variant_text"] = apply_variant(r.std_text, *variant);
    }
    out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<TweetRecord> read_corpus_jsonl(const std::filesystem::path& path) {
  std::vector<TweetRecord> out;
  for_each_line(read_file(path), path.string(), [&](const json& j) {
    TweetRecord r = raw_record(j);
    if (auto s = optional_string(j, "std_text")) r.std_text = *s;
    if (auto h = optional_string(j, "image_hash")) r.image_hash = hash_from_hex(*h);
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      if (!it->is_number_integer() || (it->get<int>() != 0 && it->get<int>() != 1)) {
        throw InputError("field 'label' must be 0 or 1");
      }
      r.label = it->get<int>() == 1 ? Label::Sponsored : Label::NonSponsored;
    }
    if (auto s = optional_string(j, "split")) r.split = parse_split(*s);
    if (auto s = optional_string(j, "subset")) r.subset = parse_org(*s);
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace propnet
