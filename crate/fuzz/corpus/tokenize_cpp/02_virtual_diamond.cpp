class Top {};
class Left : virtual public Top {};
class Right : public virtual Top {};
class Bottom : public Left, public Right {};
