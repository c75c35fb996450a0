#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glider/data_io.hpp"

namespace glider {

// Exit codes shared by the detection commands.
inline constexpr int kExitOk = 0;          // no anomaly
inline constexpr int kExitUsage = 1;       // parse/validation/runtime error
inline constexpr int kExitAnomaly = 2;     // at least one anomaly event
inline constexpr int kExitFalseAlarm = 3;  // false alarms only

int exit_code_for(const std::vector<DetectionEvent>& events);

struct RunManifest {
    std::string scenario_id;
    std::string mode;  // simulate | offline | online | replay-online
    std::string config_path;
    std::vector<std::string> input_paths;
    std::string out_dir;
    std::uint64_t seed = 0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

struct SimulateOutputs {
    std::filesystem::path dense;
    std::filesystem::path sparse;
    std::filesystem::path truth;
    std::filesystem::path resolved_config;
    std::filesystem::path manifest;
};

SimulateOutputs cmd_simulate(const RunConfig& cfg, const std::string& config_path,
                             const std::filesystem::path& out_dir,
                             Warnings* warnings = nullptr);

int cmd_detect_offline(const std::filesystem::path& dense_path,
                       const std::filesystem::path& sparse_path, const RunConfig& cfg,
                       const std::string& config_path,
                       const std::filesystem::path& out_dir, Warnings* warnings = nullptr);

int cmd_detect_online(const std::filesystem::path& sparse_path, const RunConfig& cfg,
                      const std::string& config_path,
                      const std::filesystem::path& out_dir, Warnings* warnings = nullptr);

// Replays a sparse file through a spool directory: a feeder drops one
// record file per cadence tick, a consumer ingests each file exactly once
// (consumed-file ledger survives restarts), extends the estimates, and
// appends fresh detection events to a live log. With cadence 0 every record
// is flushed immediately. stop_after > 0 stops after that many records have
// been consumed, leaving the spool ready for a later resume.
int cmd_replay_online(const std::filesystem::path& sparse_path, const RunConfig& cfg,
                      const std::string& config_path,
                      const std::filesystem::path& out_dir, double cadence_s,
                      bool realtime, int stop_after = 0, Warnings* warnings = nullptr);

}  // namespace glider
