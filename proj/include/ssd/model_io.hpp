#pragma once

#include <string>

#include "ssd/detector.hpp"
#include "ssd/losses.hpp"

namespace ssd {

// Versioned JSON documents; floats carry shortest round-trip decimals, so
// save -> load -> score reproduces scores bit-for-bit.
void save_model(const DetectorModel& model, const std::string& path);      // ssd-model/1
DetectorModel load_model(const std::string& path);

void save_fewshot(const FewShotModel& model, const std::string& path);     // ssd-fewshot/1
FewShotModel load_fewshot(const std::string& path);

void save_calibration(const Calibration& cal, const std::string& path);    // ssd-cal/1
Calibration load_calibration(const std::string& path);

void save_toy_encoder(const ToyEncoder& enc, const std::string& path);     // ssd-toy-encoder/1
ToyEncoder load_toy_encoder(const std::string& path);

}  // namespace ssd
