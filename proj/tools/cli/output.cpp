#include "output.hpp"

#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ceq/errors.hpp"
#include "config.hpp"

namespace ceqcli {

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::render() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << quoted(cells[i]);
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string cell(double x) { return format_number(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell_flag(bool x) { return x ? "1" : "0"; }

PointError describe(std::exception_ptr error, std::string point) {
  PointError e;
  e.point = std::move(point);
  try {
    std::rethrow_exception(error);
  } catch (const ceq::ValidationError& x) {
    e.kind = "validation";
    e.message = x.what();
    e.exit_code = 2;
  } catch (const ceq::FitError& x) {
    e.kind = "fit";
    e.message = x.what();
  } catch (const ceq::ChannelUnsupportedError& x) {
    e.kind = "channel";
    e.message = x.what();
  } catch (const ceq::Error& x) {
    e.kind = "numerical";
    e.message = x.what();
  } catch (const std::exception& x) {
    e.kind = "internal";
    e.message = x.what();
  }
  return e;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

}  // namespace ceqcli
