#include "d2d/units.hpp"

#include <cmath>

namespace d2d {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }
double watt_to_dbm(double watt) { return linear_to_db(watt) + 30.0; }
double dbw_to_watt(double dbw) { return db_to_linear(dbw); }
double watt_to_dbw(double watt) { return linear_to_db(watt); }
double dbm_to_dbw(double dbm) { return dbm - 30.0; }
double dbw_to_dbm(double dbw) { return dbw + 30.0; }

}  // namespace d2d
