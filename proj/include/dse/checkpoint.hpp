#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dse/student.hpp"
#include "dse/teacher.hpp"

namespace dse {

// Checkpoint file: magic "DSECKPT1", u32 format version, model kind,
// JSON config snapshot, named-tensor archive (name, shape, little-endian
// f64 payload), trailing FNV-1a checksum over everything after the magic.

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json encoder_config_to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

void save_teacher(TeacherModel& model, const std::string& path);
TeacherModel load_teacher(const std::string& path);

void save_student(StudentModel& model, const std::string& path);
StudentModel load_student(const std::string& path);

// Reads just the kind field ("teacher" or "student").
std::string checkpoint_kind(const std::string& path);

// Stable digest of a student's config and weights; stamped into
// embedding index headers.
std::string model_fingerprint(StudentModel& model);

}  // namespace dse
