#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hbary::cli {

namespace fs = std::filesystem;

// Bad flags or flag combinations.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes through a temporary file and renames, so readers never see a partial file.
inline void write_file(const fs::path& p, const std::string& content) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + p.string());
        out << content;
        if (!out.flush()) throw IoError("write failed for " + p.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot write " + p.string() + ": " + ec.message());
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

// 64-bit FNV-1a, hex.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> args)
        : command_(std::move(command)), args_(std::move(args)), start_(std::chrono::steady_clock::now()) {}

    void seed(std::uint64_t s) { seed_ = s; }
    void input(const fs::path& p, const std::string& bytes) { inputs_[p.string()] = digest(bytes); }
    void output(const fs::path& p) { outputs_.push_back(p.string()); }

    void write(const fs::path& p) const {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json doc{{"command", command_}, {"arguments", args_},  {"inputs", inputs_},
                           {"outputs", outputs_}, {"tool_version", "0.1.0"}, {"wall_time_s", wall}};
        doc["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
        write_file(p, doc.dump(2) + "\n");
    }

private:
    std::string command_;
    std::vector<std::string> args_;
    std::optional<std::uint64_t> seed_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace hbary::cli
