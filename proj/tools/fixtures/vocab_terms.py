# Controlled vocabulary source lists: (term, discipline).
ELECTRICAL = """
transformer protection
switchgear
circuit breaker
relay coordination
earthing
lightning protection
substation design
power quality
harmonic
voltage regulation
reactive compensation
load flow
fault analysis
short circuit calculation
protection relay
distribution network
transmission line
overhead line
underground cable
cable sizing
arc flash
electrical safety
motor control
variable speed drive
induction motor
synchronous generator
excitation system
power electronics
rectifier
inverter
battery storage
photovoltaic
wind turbine generator
grid integration
smart grid
smart meter
scada
plc programming
ladder logic
hmi design
instrumentation
process control
control loop tuning
pid controller
signal processing
embedded system
microcontroller
printed circuit board
electromagnetic compatibility
telecommunication
fibre optic
radio frequency
antenna design
lighting design
building wiring
wiring regulation
hazardous area
intrinsic safety
electrical drawing
single line diagram
power factor correction
ups system
standby generator
high voltage testing
insulation testing
partial discharge
condition monitoring
thermography
electrical maintenance
transformer maintenance
busbar
mv switchboard
lv distribution
dc system
power system stability
frequency control
demand response
energy metering
tariff analysis
electric vehicle charging
solar farm
hydro power
nuclear power
digital electronics
analogue electronics
fpga
sensor network
industrial network
cybersecurity for ot
iec 61850
protection setting
motor protection
capacitor bank
surge arrester
relay testing
power cable jointing
generator synchronisation
""".strip().splitlines()

MECHANICAL = """
pump
cavitation
centrifugal compressor
reciprocating compressor
steam turbine
steam system
boiler operation
heat exchanger
refrigeration
hvac
chiller plant
ventilation
fluid mechanics
hydraulic
pneumatic
piping design
pipe stress
valve
pressure vessel
welding
weld inspection
non destructive testing
metallurgy
corrosion
material selection
fatigue
fracture mechanics
finite element analysis
computational fluid dynamics
cad modelling
solidworks
geometric tolerancing
machine design
gear
bearing
lubrication
vibration analysis
rotating equipment
alignment
balancing
conveyor
crusher
materials handling
open pit mining
underground mining
mineral processing
slurry transport
mill
flotation
bulk handling
crane
lifting equipment
structural steel
steel fabrication
sheet metal
casting
forging
machining
cnc programming
additive manufacturing
thermodynamics
heat transfer
combustion
petrol engine
diesel engine
gas turbine
cogeneration
compressed air
fan
dust extraction
noise control
press tool
tribology
seal
mechanical maintenance
reliability centred maintenance
root cause analysis
failure analysis
maintenance planning
spare part
plant layout
tank design
fire protection
sprinkler
water treatment
wastewater
desalination
robotics
shaft design
mechanical drawing
process flow diagram
pressure testing
lifting plan
machine guarding
cylinder repair
heat treatment
""".strip().splitlines()

BOTH = """
project management
energy management
energy efficiency
risk assessment
hazard identification
occupational health
safety management
quality management
iso 9001
commissioning
technical report writing
engineering economics
contract management
procurement
asset management
lean manufacturing
six sigma
leadership
team management
professional ethics
engineering law
sustainability
environmental impact
renewable energy
automation
mechatronics
data analytics
machine learning
matlab
autocad
feasibility study
cost estimation
systems engineering
technical communication
budgeting
finance for engineers
negotiation
coaching and mentoring
innovation
statistics
""".strip().splitlines()
