#include "ccdispatch/timeparse.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace ccd {

Timestamp parse_iso8601(const std::string& s) {
  int y, mo, d, h, mi, sec;
  char z = '\0';
  const int got =
      std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &sec, &z);
  if (got < 6 || (got == 7 && z != 'Z'))
    throw std::runtime_error("bad ISO-8601 timestamp: \"" + s + "\"");
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  const time_t t = timegm(&tm);
  if (t == time_t(-1))
    throw std::runtime_error("unrepresentable timestamp: \"" + s + "\"");
  return Timestamp(t);
}

std::string format_iso8601(Timestamp t) {
  std::tm tm{};
  const time_t tt = time_t(t);
  gmtime_r(&tt, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace ccd
