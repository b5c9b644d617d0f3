from datetime import date, datetime, time, timedelta
from dateutil.relativedelta import relativedelta
