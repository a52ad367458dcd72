#pragma once

namespace d2d {

// Power unit conversions. dBm is referenced to 1 mW, dBW to 1 W.
double db_to_linear(double db);
double linear_to_db(double ratio);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double dbw_to_watt(double dbw);
double watt_to_dbw(double watt);
double dbm_to_dbw(double dbm);
double dbw_to_dbm(double dbw);

}  // namespace d2d
