#include "ovsim/device_profile.h"

#include <stdexcept>

namespace ovsim {

void device_profile::validate() const
{
  if (name.empty()) {
    throw std::invalid_argument("device profile needs a name");
  }
  for (const auto& b : retries) {
    if (b.min_delay < 0 || b.max_delay < b.min_delay || b.count == 0) {
      throw std::invalid_argument("profile " + name + ": malformed retry batch");
    }
  }
  if (block_duration < 12 * k_hour_ms) {
    throw std::invalid_argument("profile " + name + ": final block must last at least 12 h");
  }
}

unsigned device_profile::total_retries() const
{
  unsigned n = 0;
  for (const auto& b : retries) {
    n += b.count;
  }
  return n;
}

const retry_batch* device_profile::batch_after_reject(unsigned n) const
{
  unsigned seen = 0;
  for (const auto& b : retries) {
    seen += b.count;
    if (n <= seen) {
      return &b;
    }
  }
  return nullptr;
}

namespace {

device_profile blocking(std::string name, std::string model)
{
  return device_profile{std::move(name), std::move(model), {}, 12 * k_hour_ms, false};
}

std::vector<device_profile> make_profiles()
{
  std::vector<device_profile> v;
  v.push_back(blocking("default", "generic handset"));
  v.push_back(device_profile{"oneplus_9_pro",
                             "OnePlus 9 Pro",
                             {{30 * k_minute_ms, 60 * k_minute_ms, 5}, {10 * k_second_ms, 10 * k_second_ms, 10}},
                             12 * k_hour_ms,
                             true});
  // Bare retry schedule; T3247 support unknown.
  v.push_back(device_profile{
      "pixel_5", "Google Pixel 5", {{30 * k_second_ms, 30 * k_second_ms, 2}}, 12 * k_hour_ms, false});

  const std::pair<const char*, const char*> blocked[] = {
      {"huawei_p20_pro", "Huawei P20 Pro"},  {"huawei_p30", "Huawei P30"},
      {"huawei_p30_lite", "Huawei P30 Lite"}, {"huawei_p40_5g", "Huawei P40 5G"},
      {"samsung_a8", "Samsung A8"},          {"samsung_s10", "Samsung S10"},
      {"samsung_s21_5g", "Samsung S21 5G"},  {"lg_nexus_5x", "LG Nexus 5X"},
      {"iphone_6s", "Apple iPhone 6S"},      {"iphone_7", "Apple iPhone 7"},
      {"iphone_8", "Apple iPhone 8"},        {"iphone_11", "Apple iPhone 11"},
      {"iphone_x", "Apple iPhone X"},        {"xiaomi_mi_9", "Xiaomi Mi 9"},
      {"xiaomi_mix_3_5g", "Xiaomi Mix 3 5G"}, {"pixel_2", "Google Pixel 2"},
      {"pixel_3a", "Google Pixel 3a"},       {"pixel_4", "Google Pixel 4"},
  };
  for (const auto& [key, model] : blocked) {
    v.push_back(blocking(key, model));
  }
  for (const auto& p : v) {
    p.validate();
  }
  return v;
}

} // namespace

const std::vector<device_profile>& builtin_profiles()
{
  static const std::vector<device_profile> profiles = make_profiles();
  return profiles;
}

const device_profile& find_profile(std::string_view name)
{
  for (const auto& p : builtin_profiles()) {
    if (p.name == name) {
      return p;
    }
  }
  throw std::invalid_argument("unknown device profile '" + std::string(name) + "'");
}

} // namespace ovsim
